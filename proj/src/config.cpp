#include "tilt/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tilt/errors.hpp"

namespace tilt {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw UsageError("unknown config key '" + where + "." + key + "'");
  }
}

template <typename T>
void get_to_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

void get_opt(const json& j, const char* key, std::optional<double>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<double>();
}

void parse_pendulum(const json& j, PendulumParams& p) {
  check_keys(j, "pendulum", {"m_p", "l_p", "I_p", "C", "g"});
  get_to_if(j, "m_p", p.m_p);
  get_to_if(j, "l_p", p.l_p);
  get_to_if(j, "I_p", p.I_p);
  get_to_if(j, "C", p.C);
  get_to_if(j, "g", p.g);
  p.validate();
}

void parse_body(const json& j, BodyParams& b) {
  check_keys(j, "body", {"m_b", "I_b", "l_12", "l_bcg"});
  get_to_if(j, "m_b", b.m_b);
  get_to_if(j, "I_b", b.I_b);
  get_to_if(j, "l_12", b.l_12);
  get_to_if(j, "l_bcg", b.l_bcg);
  b.validate();
}

void parse_profile(const json& j, ProfileSpec& p) {
  check_keys(j, "profile", {"kind", "amplitude", "rate", "center_time"});
  get_to_if(j, "kind", p.kind);
  get_to_if(j, "amplitude", p.amplitude);
  get_to_if(j, "rate", p.rate);
  get_to_if(j, "center_time", p.center_time);
  if (p.kind != "constant" && p.kind != "sigmoid" && p.kind != "ramp")
    throw UsageError("profile.kind must be constant, sigmoid or ramp");
}

void parse_noise(const json& j, NoiseSpec& n) {
  check_keys(j, "noise",
             {"gyro_bias", "gyro_bias_walk_std", "gyro_white_std",
              "accel_white_std", "vibration_amp", "vibration_freqs",
              "encoder_noise_std", "encoder_quantum", "seed"});
  get_to_if(j, "gyro_bias", n.gyro_bias);
  get_to_if(j, "gyro_bias_walk_std", n.gyro_bias_walk_std);
  get_to_if(j, "gyro_white_std", n.gyro_white_std);
  get_to_if(j, "accel_white_std", n.accel_white_std);
  get_to_if(j, "vibration_amp", n.vibration_amp);
  get_to_if(j, "vibration_freqs", n.vibration_freqs);
  get_to_if(j, "encoder_noise_std", n.encoder_noise_std);
  get_to_if(j, "encoder_quantum", n.encoder_quantum);
  get_to_if(j, "seed", n.seed);
  n.validate();
}

void parse_sim(const json& j, SimSpec& s) {
  check_keys(j, "sim", {"dt", "duration", "phi0", "phi_dot0"});
  get_to_if(j, "dt", s.dt);
  get_to_if(j, "duration", s.duration);
  get_opt(j, "phi0", s.phi0);
  get_opt(j, "phi_dot0", s.phi_dot0);
  if (!(s.dt > 0.0)) throw UsageError("sim.dt must be > 0");
  if (!(s.duration > 0.0)) throw UsageError("sim.duration must be > 0");
}

void parse_prefilter(const json& j, PrefilterSpec& p) {
  check_keys(j, "estimator.prefilter", {"channels", "mode", "order", "cutoff_hz"});
  get_to_if(j, "channels", p.channels);
  get_to_if(j, "mode", p.mode);
  get_to_if(j, "order", p.order);
  get_to_if(j, "cutoff_hz", p.cutoff_hz);
  if (p.channels != "none" && p.channels != "phi" && p.channels != "gyro" &&
      p.channels != "both")
    throw UsageError("estimator.prefilter.channels must be none|phi|gyro|both");
  if (p.mode != "causal" && p.mode != "zero_phase")
    throw UsageError("estimator.prefilter.mode must be causal|zero_phase");
}

void parse_estimator(const json& j, EstimatorSpec& e) {
  check_keys(j, "estimator", {"scheme", "window_w", "clamp", "prefilter"});
  get_to_if(j, "scheme", e.scheme);
  get_to_if(j, "window_w", e.window_w);
  get_to_if(j, "clamp", e.clamp);
  if (j.contains("prefilter")) parse_prefilter(j.at("prefilter"), e.prefilter);
  if (e.scheme != "central" && e.scheme != "backward")
    throw UsageError("estimator.scheme must be central|backward");
  if (e.clamp != "saturate_flag" && e.clamp != "reject")
    throw UsageError("estimator.clamp must be saturate_flag|reject");
}

void parse_newton(const json& j, NewtonConfig& n) {
  check_keys(j, "newton",
             {"delta_p", "delta_p_floor", "h", "max_iters", "tol",
              "hessian_regularization", "backtracking", "max_halvings",
              "stencil"});
  get_to_if(j, "delta_p", n.delta_p);
  get_to_if(j, "delta_p_floor", n.delta_p_floor);
  get_to_if(j, "h", n.h);
  get_to_if(j, "max_iters", n.max_iters);
  get_to_if(j, "tol", n.tol);
  get_to_if(j, "hessian_regularization", n.hessian_regularization);
  get_to_if(j, "backtracking", n.backtracking);
  get_to_if(j, "max_halvings", n.max_halvings);
  if (j.contains("stencil")) {
    const auto s = j.at("stencil").get<std::string>();
    if (s == "four_point")
      n.stencil = HessianStencil::four_point;
    else if (s == "single_difference")
      n.stencil = HessianStencil::single_difference;
    else
      throw UsageError("newton.stencil must be four_point|single_difference");
  }
  if (!(n.delta_p > 0.0) || !(n.h > 0.0) || !(n.tol > 0.0))
    throw UsageError("newton: delta_p, h, tol must be > 0");
  if (n.hessian_regularization < 0.0)
    throw UsageError("newton.hessian_regularization must be >= 0");
}

void parse_supervisor(const json& j, SupervisorSpec& s) {
  check_keys(j, "supervisor", {"window_s", "interval_s", "free"});
  get_to_if(j, "window_s", s.window_s);
  get_to_if(j, "interval_s", s.interval_s);
  get_to_if(j, "free", s.free);
}

void parse_kalman(const json& j, KalmanSpec& k) {
  check_keys(j, "kalman", {"q_theta", "q_bias", "r", "calib_window_s", "joseph"});
  get_to_if(j, "q_theta", k.q_theta);
  get_to_if(j, "q_bias", k.q_bias);
  get_opt(j, "r", k.r);
  get_to_if(j, "calib_window_s", k.calib_window_s);
  get_to_if(j, "joseph", k.joseph);
}

void parse_report(const json& j, ReportSpec& r) {
  check_keys(j, "report", {"fir", "fir_order", "fir_cutoff_hz"});
  get_to_if(j, "fir", r.fir);
  get_to_if(j, "fir_order", r.fir_order);
  get_to_if(j, "fir_cutoff_hz", r.fir_cutoff_hz);
}

}  // namespace

TiltProfile ProfileSpec::build() const {
  if (kind == "constant") return TiltProfile::constant(amplitude);
  if (kind == "sigmoid") return TiltProfile::sigmoid(amplitude, rate, center_time);
  if (kind == "ramp")
    return TiltProfile::piecewise_linear(amplitude, rate, center_time);
  throw UsageError("unknown profile kind '" + kind + "'");
}

EstimatorConfig EstimatorSpec::build(const PendulumParams& p, double dt) const {
  EstimatorConfig cfg = EstimatorConfig::for_pendulum(p);
  cfg.dt = dt;
  cfg.window_w = window_w;
  cfg.diff_scheme = scheme == "central" ? kernels::DiffScheme::central
                                        : kernels::DiffScheme::backward;
  cfg.clamp_policy = clamp == "reject" ? ClampPolicy::reject
                                       : ClampPolicy::saturate_flag;
  cfg.validate();
  return cfg;
}

Config parse_config(const std::string& text, const std::string& where) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(where + ": " + e.what());
  }
  check_keys(j, "config",
             {"pendulum", "body", "profile", "noise", "sim", "estimator",
              "newton", "supervisor", "kalman", "report"});
  Config c;
  if (j.contains("pendulum")) parse_pendulum(j.at("pendulum"), c.pendulum);
  if (j.contains("body")) parse_body(j.at("body"), c.body);
  if (j.contains("profile")) parse_profile(j.at("profile"), c.profile);
  if (j.contains("noise")) parse_noise(j.at("noise"), c.noise);
  if (j.contains("sim")) parse_sim(j.at("sim"), c.sim);
  if (j.contains("estimator")) parse_estimator(j.at("estimator"), c.estimator);
  if (j.contains("newton")) parse_newton(j.at("newton"), c.newton);
  if (j.contains("supervisor")) parse_supervisor(j.at("supervisor"), c.supervisor);
  if (j.contains("kalman")) parse_kalman(j.at("kalman"), c.kalman);
  if (j.contains("report")) parse_report(j.at("report"), c.report);
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string Config::canonical_json() const {
  json j;
  j["pendulum"] = {{"m_p", pendulum.m_p}, {"l_p", pendulum.l_p},
                   {"I_p", pendulum.I_p}, {"C", pendulum.C}, {"g", pendulum.g}};
  j["body"] = {{"m_b", body.m_b}, {"I_b", body.I_b}, {"l_12", body.l_12},
               {"l_bcg", body.l_bcg}};
  j["profile"] = {{"kind", profile.kind}, {"amplitude", profile.amplitude},
                  {"rate", profile.rate}, {"center_time", profile.center_time}};
  j["noise"] = {{"gyro_bias", noise.gyro_bias},
                {"gyro_bias_walk_std", noise.gyro_bias_walk_std},
                {"gyro_white_std", noise.gyro_white_std},
                {"accel_white_std", noise.accel_white_std},
                {"vibration_amp", noise.vibration_amp},
                {"vibration_freqs", noise.vibration_freqs},
                {"encoder_noise_std", noise.encoder_noise_std},
                {"encoder_quantum", noise.encoder_quantum},
                {"seed", noise.seed}};
  j["sim"] = {{"dt", sim.dt}, {"duration", sim.duration}};
  if (sim.phi0) j["sim"]["phi0"] = *sim.phi0;
  if (sim.phi_dot0) j["sim"]["phi_dot0"] = *sim.phi_dot0;
  j["estimator"] = {{"scheme", estimator.scheme},
                    {"window_w", estimator.window_w},
                    {"clamp", estimator.clamp},
                    {"prefilter",
                     {{"channels", estimator.prefilter.channels},
                      {"mode", estimator.prefilter.mode},
                      {"order", estimator.prefilter.order},
                      {"cutoff_hz", estimator.prefilter.cutoff_hz}}}};
  j["newton"] = {{"delta_p", newton.delta_p},
                 {"delta_p_floor", newton.delta_p_floor},
                 {"h", newton.h},
                 {"max_iters", newton.max_iters},
                 {"tol", newton.tol},
                 {"hessian_regularization", newton.hessian_regularization},
                 {"backtracking", newton.backtracking},
                 {"max_halvings", newton.max_halvings},
                 {"stencil", newton.stencil == HessianStencil::four_point
                                 ? "four_point"
                                 : "single_difference"}};
  j["supervisor"] = {{"window_s", supervisor.window_s},
                     {"interval_s", supervisor.interval_s},
                     {"free", supervisor.free}};
  j["kalman"] = {{"q_theta", kalman.q_theta},
                 {"q_bias", kalman.q_bias},
                 {"calib_window_s", kalman.calib_window_s},
                 {"joseph", kalman.joseph}};
  if (kalman.r) j["kalman"]["r"] = *kalman.r;
  j["report"] = {{"fir", report.fir},
                 {"fir_order", report.fir_order},
                 {"fir_cutoff_hz", report.fir_cutoff_hz}};
  return j.dump();
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Config::hash() const { return fnv1a_hex(canonical_json()); }

}  // namespace tilt
