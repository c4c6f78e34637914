#include "vdvio/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <type_traits>

namespace vdvio {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Wraps a mapping node, remembers its path for messages and rejects unknown keys.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, std::set<std::string> keys)
      : node_(node), path_(std::move(path)) {
    if (!node_) return;
    if (!node_.IsMap()) throw ConfigError(fmt::format("{}: expected a mapping", path_));
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!keys.count(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", path_, key));
    }
  }

  template <typename T>
  void read(const char* key, T& value) const {
    const YAML::Node n = get(key);
    if (!n) return;
    try {
      value = n.as<T>();
    } catch (const YAML::Exception& e) {
      throw ConfigError(fmt::format("{}.{}: {}", path_, key, e.what()));
    }
  }

  void read_vec(const char* key, Eigen::Ref<Eigen::VectorXd> value) const {
    if (!has(key)) return;
    std::vector<double> v;
    read(key, v);
    if (static_cast<Eigen::Index>(v.size()) != value.size()) {
      throw ConfigError(fmt::format("{}.{}: expected {} numbers", path_, key, value.size()));
    }
    for (std::size_t i = 0; i < v.size(); ++i) value[static_cast<Eigen::Index>(i)] = v[i];
  }

  void read_deg(const char* key, double& radians) const {
    if (!has(key)) return;
    double deg = 0.0;
    read(key, deg);
    radians = deg * kDeg;
  }

  Section child(const char* key, std::set<std::string> keys) const {
    return Section(get(key), path_ + "." + key, std::move(keys));
  }

  YAML::Node node(const char* key) const { return get(key); }
  bool has(const char* key) const { return static_cast<bool>(get(key)); }
  const std::string& path() const { return path_; }

 private:
  // Const lookup so a missing key is not inserted into the document.
  YAML::Node get(const char* key) const {
    if (!node_) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& n = node_;
    return n[key];
  }

  YAML::Node node_;
  std::string path_;
};

void check_positive(double v, const std::string& what) {
  if (!(v > 0.0)) throw ConfigError(fmt::format("{} must be positive", what));
}

Mat3 rpy_to_matrix(const Vec3& rpy_rad) {
  return (Eigen::AngleAxisd(rpy_rad.z(), Vec3::UnitZ()) *
          Eigen::AngleAxisd(rpy_rad.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(rpy_rad.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

Mat3 read_rotation(const Section& s) {
  if (s.has("rpy_deg") && s.has("quaternion_xyzw")) {
    throw ConfigError(fmt::format("{}: give rpy_deg or quaternion_xyzw, not both", s.path()));
  }
  if (s.has("quaternion_xyzw")) {
    Vec4 q;
    s.read_vec("quaternion_xyzw", q);
    try {
      return UnitQuaternion::from_xyzw(q).to_rotation();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("{}.quaternion_xyzw: {}", s.path(), e.what()));
    }
  }
  if (s.has("rpy_deg")) {
    Vec3 rpy;
    s.read_vec("rpy_deg", rpy);
    return rpy_to_matrix(rpy * kDeg);
  }
  return Mat3::Identity();
}

void read_transform(const Section& parent, const char* key, RigidTransform& t) {
  const Section s = parent.child(key, {"rpy_deg", "quaternion_xyzw", "translation"});
  if (s.has("rpy_deg") || s.has("quaternion_xyzw")) t.rotation = read_rotation(s);
  s.read_vec("translation", t.translation);
}

SegmentType segment_type(const std::string& name, const std::string& path) {
  if (name == "hover") return SegmentType::kHover;
  if (name == "transect") return SegmentType::kTransect;
  if (name == "turn") return SegmentType::kTurn;
  throw ConfigError(fmt::format("{}: unknown segment type '{}'", path, name));
}

const char* segment_name(SegmentType t) {
  switch (t) {
    case SegmentType::kHover: return "hover";
    case SegmentType::kTransect: return "transect";
    case SegmentType::kTurn: return "turn";
  }
  return "hover";
}

void read_trajectory(const Section& sim, TrajectorySpec& spec) {
  const Section s = sim.child("trajectory", {"lawnmower", "segments", "initial_yaw_deg",
                                             "ramp_time", "roll_amplitude_deg",
                                             "pitch_amplitude_deg", "heave_amplitude",
                                             "wobble_period"});
  if (s.has("lawnmower") && s.has("segments")) {
    throw ConfigError(fmt::format("{}: give lawnmower or segments, not both", s.path()));
  }
  if (s.has("lawnmower")) {
    const Section l = s.child("lawnmower", {"legs", "leg_length", "speed", "lane_spacing",
                                            "initial_hover", "hover_after_legs", "hover_duration"});
    int legs = 2;
    double leg_length = 50.0, speed = 0.4, lane = 2.0, initial_hover = 5.0, hover = 60.0;
    std::vector<int> hover_after;
    l.read("legs", legs);
    l.read("leg_length", leg_length);
    l.read("speed", speed);
    l.read("lane_spacing", lane);
    l.read("initial_hover", initial_hover);
    l.read("hover_after_legs", hover_after);
    l.read("hover_duration", hover);
    if (legs < 1) throw ConfigError(fmt::format("{}.legs must be at least 1", l.path()));
    check_positive(leg_length, l.path() + ".leg_length");
    check_positive(speed, l.path() + ".speed");
    check_positive(lane, l.path() + ".lane_spacing");
    spec.segments =
        lawnmower(legs, leg_length, speed, lane, initial_hover, hover_after, hover).segments;
  }
  if (s.has("segments")) {
    const YAML::Node list = s.node("segments");
    if (!list.IsSequence()) throw ConfigError(s.path() + ".segments: expected a list");
    spec.segments.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = fmt::format("{}.segments[{}]", s.path(), i);
      const Section seg(list[i], path, {"type", "duration", "speed", "turn_deg"});
      std::string type = "hover";
      Segment out;
      seg.read("type", type);
      out.type = segment_type(type, path);
      seg.read("duration", out.duration);
      seg.read("speed", out.speed);
      seg.read_deg("turn_deg", out.turn_angle);
      spec.segments.push_back(out);
    }
  }
  s.read_deg("initial_yaw_deg", spec.initial_yaw);
  s.read("ramp_time", spec.ramp_time);
  s.read_deg("roll_amplitude_deg", spec.roll_amplitude);
  s.read_deg("pitch_amplitude_deg", spec.pitch_amplitude);
  s.read("heave_amplitude", spec.heave_amplitude);
  s.read("wobble_period", spec.wobble_period);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: {}", s.path(), e.what()));
  }
}

void read_simulation(const Section& root, SimulationConfig& c) {
  const Section sim = root.child("simulation", {"trajectory", "ice", "rates", "noise", "camera",
                                                "dvl", "extrinsics", "initial_depth", "gravity",
                                                "truth_dt"});
  read_trajectory(sim, c.trajectory);

  const Section ice = sim.child("ice", {"base_height", "amplitude", "frequency", "phase", "openings"});
  ice.read("base_height", c.ice.base_height);
  ice.read("amplitude", c.ice.amplitude);
  ice.read_vec("frequency", c.ice.frequency);
  ice.read_vec("phase", c.ice.phase);
  if (ice.has("openings")) {
    const YAML::Node list = ice.node("openings");
    if (!list.IsSequence()) throw ConfigError(ice.path() + ".openings: expected a list");
    c.ice.openings.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Section o(list[i], fmt::format("{}.openings[{}]", ice.path(), i), {"center", "radius"});
      IceOpening opening;
      o.read_vec("center", opening.center);
      o.read("radius", opening.radius);
      c.ice.openings.push_back(opening);
    }
  }
  if (std::abs(c.ice.amplitude) >= c.ice.base_height) {
    throw ConfigError(ice.path() + ": amplitude must be smaller than the standoff");
  }

  const Section rates = sim.child("rates", {"imu", "dvl", "pressure", "camera"});
  rates.read("imu", c.rates.imu);
  rates.read("dvl", c.rates.dvl);
  rates.read("pressure", c.rates.pressure);
  rates.read("camera", c.rates.camera);
  for (double r : {c.rates.imu, c.rates.dvl, c.rates.pressure, c.rates.camera}) {
    check_positive(r, rates.path() + " entries");
  }

  const Section n = sim.child(
      "noise", {"gyro_noise_density", "accel_noise_density", "gyro_bias_walk", "accel_bias_walk",
                "initial_gyro_bias", "initial_accel_bias", "dvl_velocity_sd", "dvl_range_sd",
                "pressure_sd", "camera_sd"});
  n.read("gyro_noise_density", c.noise.gyro_noise_density);
  n.read("accel_noise_density", c.noise.accel_noise_density);
  n.read("gyro_bias_walk", c.noise.gyro_bias_walk);
  n.read("accel_bias_walk", c.noise.accel_bias_walk);
  n.read_vec("initial_gyro_bias", c.noise.initial_gyro_bias);
  n.read_vec("initial_accel_bias", c.noise.initial_accel_bias);
  n.read("dvl_velocity_sd", c.noise.dvl_velocity_sd);
  n.read("dvl_range_sd", c.noise.dvl_range_sd);
  n.read("pressure_sd", c.noise.pressure_sd);
  n.read("camera_sd", c.noise.camera_sd);

  const Section cam = sim.child("camera", {"fov_deg", "min_depth", "max_depth", "landmark_spacing",
                                           "track_survival", "landmark_margin"});
  cam.read("fov_deg", c.camera.fov_deg);
  cam.read("min_depth", c.camera.min_depth);
  cam.read("max_depth", c.camera.max_depth);
  cam.read("landmark_spacing", c.camera.landmark_spacing);
  cam.read("track_survival", c.camera.track_survival);
  cam.read("landmark_margin", c.camera.landmark_margin);
  check_positive(c.camera.landmark_spacing, cam.path() + ".landmark_spacing");

  const Section dvl = sim.child("dvl", {"beam_angle_deg", "min_range", "max_range"});
  dvl.read("beam_angle_deg", c.dvl.beam_angle_deg);
  dvl.read("min_range", c.dvl.min_range);
  dvl.read("max_range", c.dvl.max_range);

  const Section ext = sim.child("extrinsics", {"dvl_to_imu", "pressure_to_dvl", "imu_to_cam"});
  read_transform(ext, "dvl_to_imu", c.extrinsics.dvl_to_imu);
  const Section pd = ext.child("pressure_to_dvl", {"rpy_deg", "quaternion_xyzw"});
  if (pd.has("rpy_deg") || pd.has("quaternion_xyzw")) c.extrinsics.pressure_to_dvl = read_rotation(pd);
  read_transform(ext, "imu_to_cam", c.extrinsics.imu_to_cam);

  sim.read("initial_depth", c.initial_depth);
  sim.read("gravity", c.gravity);
  sim.read("truth_dt", c.truth_dt);
}

void read_estimator(const Section& root, EstimatorConfig& c) {
  const Section est = root.child("estimator", {"imu", "init", "max_clones", "keyframe", "visual",
                                               "dvl", "pressure", "enhancement", "output_rate",
                                               "max_position_sigma"});
  const Section imu = est.child("imu", {"gyro_noise_density", "accel_noise_density",
                                        "gyro_bias_walk", "accel_bias_walk", "gravity"});
  imu.read("gyro_noise_density", c.imu.gyro_noise_density);
  imu.read("accel_noise_density", c.imu.accel_noise_density);
  imu.read("gyro_bias_walk", c.imu.gyro_bias_walk);
  imu.read("accel_bias_walk", c.imu.accel_bias_walk);
  imu.read("gravity", c.imu.gravity_magnitude);

  const Section init = est.child("init", {"duration", "max_accel_variance", "sigma_roll_pitch",
                                          "sigma_yaw", "sigma_position", "sigma_velocity",
                                          "sigma_gyro_bias", "sigma_accel_bias"});
  init.read("duration", c.init.duration);
  init.read("max_accel_variance", c.init.max_accel_variance);
  init.read("sigma_roll_pitch", c.init.sigma_roll_pitch);
  init.read("sigma_yaw", c.init.sigma_yaw);
  init.read("sigma_position", c.init.sigma_position);
  init.read("sigma_velocity", c.init.sigma_velocity);
  init.read("sigma_gyro_bias", c.init.sigma_gyro_bias);
  init.read("sigma_accel_bias", c.init.sigma_accel_bias);
  check_positive(c.init.duration, init.path() + ".duration");

  est.read("max_clones", c.max_clones);
  if (c.max_clones < 2) throw ConfigError(est.path() + ".max_clones must be at least 2");

  const Section kf = est.child("keyframe", {"enabled", "min_features", "min_translation",
                                            "min_feature_loss_fraction"});
  kf.read("enabled", c.keyframe.enabled);
  kf.read("min_features", c.keyframe.criteria.min_features);
  kf.read("min_translation", c.keyframe.criteria.min_translation);
  kf.read("min_feature_loss_fraction", c.keyframe.criteria.min_feature_loss_fraction);
  check_positive(c.keyframe.criteria.min_features, kf.path() + ".min_features");
  check_positive(c.keyframe.criteria.min_translation, kf.path() + ".min_translation");
  check_positive(c.keyframe.criteria.min_feature_loss_fraction,
                 kf.path() + ".min_feature_loss_fraction");

  const Section vis = est.child("visual", {"enabled", "sigma", "chi2_confidence",
                                           "min_track_length", "max_features_per_update"});
  vis.read("enabled", c.visual.enabled);
  vis.read("sigma", c.visual.sigma);
  vis.read("chi2_confidence", c.visual.chi2_confidence);
  vis.read("min_track_length", c.visual.min_track_length);
  vis.read("max_features_per_update", c.visual.max_features_per_update);
  check_positive(c.visual.sigma, vis.path() + ".sigma");
  if (c.visual.min_track_length < 3) {
    throw ConfigError(vis.path() + ".min_track_length must be at least 3");
  }

  const Section dvl = est.child("dvl", {"enabled", "chi2_confidence", "min_noise_sd"});
  dvl.read("enabled", c.dvl.enabled);
  dvl.read("chi2_confidence", c.dvl.chi2_confidence);
  dvl.read("min_noise_sd", c.dvl.min_noise_sd);

  const Section pr = est.child("pressure", {"enabled", "chi2_confidence", "min_noise_sd"});
  pr.read("enabled", c.pressure.enabled);
  pr.read("chi2_confidence", c.pressure.chi2_confidence);
  pr.read("min_noise_sd", c.pressure.min_noise_sd);

  const Section en = est.child("enhancement", {"enabled", "max_candidates", "sigma_z"});
  en.read("enabled", c.enhancement.enabled);
  en.read("max_candidates", c.enhancement.match.max_candidates);
  en.read("sigma_z", c.enhancement.match.sigma_z);
  check_positive(c.enhancement.match.sigma_z, en.path() + ".sigma_z");

  for (double conf : {c.visual.chi2_confidence, c.dvl.chi2_confidence, c.pressure.chi2_confidence}) {
    if (!(conf > 0.0 && conf < 1.0)) {
      throw ConfigError(est.path() + ": chi2_confidence must lie in (0, 1)");
    }
  }

  est.read("output_rate", c.output_rate);
  est.read("max_position_sigma", c.max_position_sigma);
}

// Shortest text that parses back to the same double.
std::string num(double v) { return fmt::format("{}", v); }

void emit_vec(YAML::Emitter& out, const char* key, const Eigen::Ref<const Eigen::VectorXd>& v) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << num(v[i]);
  out << YAML::EndSeq;
}

void emit_rotation(YAML::Emitter& out, const Mat3& r) {
  emit_vec(out, "quaternion_xyzw", UnitQuaternion::from_rotation(r).xyzw());
}

void emit_transform(YAML::Emitter& out, const char* key, const RigidTransform& t) {
  out << YAML::Key << key << YAML::Value << YAML::BeginMap;
  emit_rotation(out, t.rotation);
  emit_vec(out, "translation", t.translation);
  out << YAML::EndMap;
}

template <typename T>
void kv(YAML::Emitter& out, const char* key, const T& value) {
  out << YAML::Key << key << YAML::Value;
  if constexpr (std::is_floating_point_v<T>) {
    out << num(value);
  } else {
    out << value;
  }
}

}  // namespace

AppConfig::AppConfig() {
  simulation.trajectory = lawnmower(6, 30.0, 0.2, 2.0, 5.0, {2, 4}, 60.0);
  simulation.trajectory.roll_amplitude = 2.0 * std::numbers::pi / 180.0;
  simulation.trajectory.pitch_amplitude = 1.5 * std::numbers::pi / 180.0;
  simulation.trajectory.heave_amplitude = 0.05;
  simulation.extrinsics = default_extrinsics();
}

AppConfig parse_config(const std::string& yaml, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}: {}", source, e.what()));
  }
  AppConfig config;
  if (!root || root.IsNull()) return config;
  const Section top(root, source, {"simulation", "estimator"});
  read_simulation(top, config.simulation);
  read_estimator(top, config.estimator);
  return config;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string format_config(const AppConfig& config) {
  const SimulationConfig& s = config.simulation;
  const EstimatorConfig& e = config.estimator;
  YAML::Emitter out;
  out << YAML::BeginMap;

  out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "trajectory" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "segments" << YAML::Value << YAML::BeginSeq;
  for (const auto& seg : s.trajectory.segments) {
    out << YAML::Flow << YAML::BeginMap;
    kv(out, "type", segment_name(seg.type));
    kv(out, "duration", seg.duration);
    kv(out, "speed", seg.speed);
    kv(out, "turn_deg", seg.turn_angle / kDeg);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  kv(out, "initial_yaw_deg", s.trajectory.initial_yaw / kDeg);
  kv(out, "ramp_time", s.trajectory.ramp_time);
  kv(out, "roll_amplitude_deg", s.trajectory.roll_amplitude / kDeg);
  kv(out, "pitch_amplitude_deg", s.trajectory.pitch_amplitude / kDeg);
  kv(out, "heave_amplitude", s.trajectory.heave_amplitude);
  kv(out, "wobble_period", s.trajectory.wobble_period);
  out << YAML::EndMap;

  out << YAML::Key << "ice" << YAML::Value << YAML::BeginMap;
  kv(out, "base_height", s.ice.base_height);
  kv(out, "amplitude", s.ice.amplitude);
  emit_vec(out, "frequency", s.ice.frequency);
  emit_vec(out, "phase", s.ice.phase);
  out << YAML::Key << "openings" << YAML::Value << YAML::BeginSeq;
  for (const auto& o : s.ice.openings) {
    out << YAML::Flow << YAML::BeginMap;
    emit_vec(out, "center", o.center);
    kv(out, "radius", o.radius);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::Key << "rates" << YAML::Value << YAML::BeginMap;
  kv(out, "imu", s.rates.imu);
  kv(out, "dvl", s.rates.dvl);
  kv(out, "pressure", s.rates.pressure);
  kv(out, "camera", s.rates.camera);
  out << YAML::EndMap;

  out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  kv(out, "gyro_noise_density", s.noise.gyro_noise_density);
  kv(out, "accel_noise_density", s.noise.accel_noise_density);
  kv(out, "gyro_bias_walk", s.noise.gyro_bias_walk);
  kv(out, "accel_bias_walk", s.noise.accel_bias_walk);
  emit_vec(out, "initial_gyro_bias", s.noise.initial_gyro_bias);
  emit_vec(out, "initial_accel_bias", s.noise.initial_accel_bias);
  kv(out, "dvl_velocity_sd", s.noise.dvl_velocity_sd);
  kv(out, "dvl_range_sd", s.noise.dvl_range_sd);
  kv(out, "pressure_sd", s.noise.pressure_sd);
  kv(out, "camera_sd", s.noise.camera_sd);
  out << YAML::EndMap;

  out << YAML::Key << "camera" << YAML::Value << YAML::BeginMap;
  kv(out, "fov_deg", s.camera.fov_deg);
  kv(out, "min_depth", s.camera.min_depth);
  kv(out, "max_depth", s.camera.max_depth);
  kv(out, "landmark_spacing", s.camera.landmark_spacing);
  kv(out, "track_survival", s.camera.track_survival);
  kv(out, "landmark_margin", s.camera.landmark_margin);
  out << YAML::EndMap;

  out << YAML::Key << "dvl" << YAML::Value << YAML::BeginMap;
  kv(out, "beam_angle_deg", s.dvl.beam_angle_deg);
  kv(out, "min_range", s.dvl.min_range);
  kv(out, "max_range", s.dvl.max_range);
  out << YAML::EndMap;

  out << YAML::Key << "extrinsics" << YAML::Value << YAML::BeginMap;
  emit_transform(out, "dvl_to_imu", s.extrinsics.dvl_to_imu);
  out << YAML::Key << "pressure_to_dvl" << YAML::Value << YAML::BeginMap;
  emit_rotation(out, s.extrinsics.pressure_to_dvl);
  out << YAML::EndMap;
  emit_transform(out, "imu_to_cam", s.extrinsics.imu_to_cam);
  out << YAML::EndMap;

  kv(out, "initial_depth", s.initial_depth);
  kv(out, "gravity", s.gravity);
  kv(out, "truth_dt", s.truth_dt);
  out << YAML::EndMap;

  out << YAML::Key << "estimator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "imu" << YAML::Value << YAML::BeginMap;
  kv(out, "gyro_noise_density", e.imu.gyro_noise_density);
  kv(out, "accel_noise_density", e.imu.accel_noise_density);
  kv(out, "gyro_bias_walk", e.imu.gyro_bias_walk);
  kv(out, "accel_bias_walk", e.imu.accel_bias_walk);
  kv(out, "gravity", e.imu.gravity_magnitude);
  out << YAML::EndMap;

  out << YAML::Key << "init" << YAML::Value << YAML::BeginMap;
  kv(out, "duration", e.init.duration);
  kv(out, "max_accel_variance", e.init.max_accel_variance);
  kv(out, "sigma_roll_pitch", e.init.sigma_roll_pitch);
  kv(out, "sigma_yaw", e.init.sigma_yaw);
  kv(out, "sigma_position", e.init.sigma_position);
  kv(out, "sigma_velocity", e.init.sigma_velocity);
  kv(out, "sigma_gyro_bias", e.init.sigma_gyro_bias);
  kv(out, "sigma_accel_bias", e.init.sigma_accel_bias);
  out << YAML::EndMap;

  kv(out, "max_clones", e.max_clones);

  out << YAML::Key << "keyframe" << YAML::Value << YAML::BeginMap;
  kv(out, "enabled", e.keyframe.enabled);
  kv(out, "min_features", e.keyframe.criteria.min_features);
  kv(out, "min_translation", e.keyframe.criteria.min_translation);
  kv(out, "min_feature_loss_fraction", e.keyframe.criteria.min_feature_loss_fraction);
  out << YAML::EndMap;

  out << YAML::Key << "visual" << YAML::Value << YAML::BeginMap;
  kv(out, "enabled", e.visual.enabled);
  kv(out, "sigma", e.visual.sigma);
  kv(out, "chi2_confidence", e.visual.chi2_confidence);
  kv(out, "min_track_length", e.visual.min_track_length);
  kv(out, "max_features_per_update", e.visual.max_features_per_update);
  out << YAML::EndMap;

  out << YAML::Key << "dvl" << YAML::Value << YAML::BeginMap;
  kv(out, "enabled", e.dvl.enabled);
  kv(out, "chi2_confidence", e.dvl.chi2_confidence);
  kv(out, "min_noise_sd", e.dvl.min_noise_sd);
  out << YAML::EndMap;

  out << YAML::Key << "pressure" << YAML::Value << YAML::BeginMap;
  kv(out, "enabled", e.pressure.enabled);
  kv(out, "chi2_confidence", e.pressure.chi2_confidence);
  kv(out, "min_noise_sd", e.pressure.min_noise_sd);
  out << YAML::EndMap;

  out << YAML::Key << "enhancement" << YAML::Value << YAML::BeginMap;
  kv(out, "enabled", e.enhancement.enabled);
  kv(out, "max_candidates", e.enhancement.match.max_candidates);
  kv(out, "sigma_z", e.enhancement.match.sigma_z);
  out << YAML::EndMap;

  kv(out, "output_rate", e.output_rate);
  kv(out, "max_position_sigma", e.max_position_sigma);
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace vdvio
