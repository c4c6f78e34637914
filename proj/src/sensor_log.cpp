#include "vdvio/sensor_log.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vdvio {

namespace {

using nlohmann::json;

json vec(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) a.push_back(vec(m.row(r).transpose()));
  return a;
}

Vec3 to_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Mat3 to_mat3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3x3 matrix");
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = to_vec3(j[r]).transpose();
  return m;
}

json transform(const RigidTransform& t) {
  return {{"rotation", mat(t.rotation)}, {"translation", vec(t.translation)}};
}

RigidTransform to_transform(const json& j) {
  RigidTransform t;
  t.rotation = to_mat3(j.at("rotation"));
  t.translation = to_vec3(j.at("translation"));
  return t;
}

json header_json(const LogHeader& h) {
  return {{"format", kLogFormat},
          {"version", h.version},
          {"seed", h.seed},
          {"rates",
           {{"imu", h.imu_rate}, {"dvl", h.dvl_rate}, {"pressure", h.pressure_rate},
            {"camera", h.camera_rate}}},
          {"extrinsics",
           {{"dvl_to_imu", transform(h.extrinsics.dvl_to_imu)},
            {"pressure_to_dvl", mat(h.extrinsics.pressure_to_dvl)},
            {"imu_to_cam", transform(h.extrinsics.imu_to_cam)}}},
          {"noise",
           {{"gyro_noise_density", h.gyro_noise_density},
            {"accel_noise_density", h.accel_noise_density},
            {"gyro_bias_walk", h.gyro_bias_walk},
            {"accel_bias_walk", h.accel_bias_walk},
            {"camera_sd", h.camera_sd}}},
          {"gravity", h.gravity}};
}

LogHeader parse_header(const json& j) {
  if (j.value("format", "") != kLogFormat) throw std::invalid_argument("not a sensor log");
  LogHeader h;
  h.version = j.at("version").get<int>();
  if (h.version != kLogVersion) {
    throw std::invalid_argument(fmt::format("unsupported log version {}", h.version));
  }
  h.seed = j.at("seed").get<std::uint64_t>();
  const json& r = j.at("rates");
  h.imu_rate = r.at("imu").get<double>();
  h.dvl_rate = r.at("dvl").get<double>();
  h.pressure_rate = r.at("pressure").get<double>();
  h.camera_rate = r.at("camera").get<double>();
  const json& e = j.at("extrinsics");
  h.extrinsics.dvl_to_imu = to_transform(e.at("dvl_to_imu"));
  h.extrinsics.pressure_to_dvl = to_mat3(e.at("pressure_to_dvl"));
  h.extrinsics.imu_to_cam = to_transform(e.at("imu_to_cam"));
  const json& n = j.at("noise");
  h.gyro_noise_density = n.at("gyro_noise_density").get<double>();
  h.accel_noise_density = n.at("accel_noise_density").get<double>();
  h.gyro_bias_walk = n.at("gyro_bias_walk").get<double>();
  h.accel_bias_walk = n.at("accel_bias_walk").get<double>();
  h.camera_sd = n.at("camera_sd").get<double>();
  h.gravity = j.at("gravity").get<double>();
  return h;
}

template <typename T>
void check_increasing(const std::vector<T>& v, const char* name) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i].timestamp > v[i - 1].timestamp)) {
      throw std::invalid_argument(
          fmt::format("{} timestamps not strictly increasing at index {}", name, i));
    }
  }
}

}  // namespace

void SensorLog::validate() const {
  check_increasing(imu, "imu");
  check_increasing(dvl, "dvl");
  check_increasing(clouds, "cloud");
  check_increasing(pressure, "pressure");
  check_increasing(camera, "camera");
  std::size_t j = 0;
  for (const auto& c : clouds) {
    while (j < dvl.size() && dvl[j].timestamp < c.timestamp) ++j;
    if (j == dvl.size() || dvl[j].timestamp != c.timestamp) {
      throw std::invalid_argument(fmt::format("cloud at t={} has no DVL ping", c.timestamp));
    }
  }
}

std::string format_log(const SensorLog& log) {
  log.validate();
  std::string out = header_json(log.header).dump() + '\n';
  std::size_t i = 0, d = 0, c = 0, p = 0, k = 0;
  const double inf = std::numeric_limits<double>::infinity();
  for (;;) {
    const double ti = i < log.imu.size() ? log.imu[i].timestamp : inf;
    const double td = d < log.dvl.size() ? log.dvl[d].timestamp : inf;
    const double tp = p < log.pressure.size() ? log.pressure[p].timestamp : inf;
    const double tk = k < log.camera.size() ? log.camera[k].timestamp : inf;
    const double t = std::min({ti, td, tp, tk});
    if (t == inf) break;
    json rec;
    if (ti == t) {
      const auto& s = log.imu[i++];
      rec = {{"type", "imu"}, {"t", s.timestamp}, {"accel", vec(s.accel)}, {"gyro", vec(s.gyro)}};
    } else if (td == t) {
      const auto& s = log.dvl[d++];
      rec = {{"type", "dvl"}, {"t", s.timestamp}, {"velocity", vec(s.velocity)},
             {"sd", s.noise_sd}, {"cloud", nullptr}};
      if (c < log.clouds.size() && log.clouds[c].timestamp == s.timestamp) {
        json pts = json::array();
        for (const auto& q : log.clouds[c].points) pts.push_back(vec(q));
        rec["cloud"] = pts;
        ++c;
      }
    } else if (tp == t) {
      const auto& s = log.pressure[p++];
      rec = {{"type", "pressure"}, {"t", s.timestamp}, {"depth", s.depth}, {"sd", s.noise_sd}};
    } else {
      const auto& s = log.camera[k++];
      json feats = json::array();
      for (const auto& f : s.features) feats.push_back({f.id, f.uv.x(), f.uv.y()});
      rec = {{"type", "camera"}, {"t", s.timestamp}, {"features", feats}};
    }
    out += rec.dump();
    out += '\n';
  }
  return out;
}

SensorLog parse_log(const std::string& text, const std::string& source) {
  SensorLog log;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (!have_header) {
        log.header = parse_header(j);
        have_header = true;
        continue;
      }
      const std::string type = j.at("type").get<std::string>();
      const double t = j.at("t").get<double>();
      const auto ordered = [&](const auto& v) {
        if (!v.empty() && !(t > v.back().timestamp)) {
          throw std::invalid_argument(fmt::format("{} timestamp {} not increasing", type, t));
        }
      };
      if (type == "imu") ordered(log.imu);
      if (type == "dvl") ordered(log.dvl);
      if (type == "pressure") ordered(log.pressure);
      if (type == "camera") ordered(log.camera);
      if (type == "imu") {
        log.imu.push_back({t, to_vec3(j.at("accel")), to_vec3(j.at("gyro"))});
      } else if (type == "dvl") {
        log.dvl.push_back({t, to_vec3(j.at("velocity")), j.at("sd").get<double>()});
        const json& cloud = j.at("cloud");
        if (!cloud.is_null()) {
          if (!cloud.is_array() || cloud.size() != 4) {
            throw std::invalid_argument("cloud must hold four points");
          }
          DvlPointCloud pc;
          pc.timestamp = t;
          for (int b = 0; b < 4; ++b) pc.points[b] = to_vec3(cloud[b]);
          log.clouds.push_back(pc);
        }
      } else if (type == "pressure") {
        log.pressure.push_back({t, j.at("depth").get<double>(), j.at("sd").get<double>()});
      } else if (type == "camera") {
        CameraFrame f;
        f.timestamp = t;
        for (const auto& o : j.at("features")) {
          if (!o.is_array() || o.size() != 3) throw std::invalid_argument("feature must be [id,u,v]");
          f.features.push_back({o[0].get<std::uint64_t>(), Vec2(o[1].get<double>(), o[2].get<double>())});
        }
        log.camera.push_back(std::move(f));
      } else {
        throw std::invalid_argument(fmt::format("unknown record type '{}'", type));
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (!have_header) throw ParseError(source, line_no, "missing header");
  try {
    log.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, line_no, e.what());
  }
  return log;
}

void write_log(const std::filesystem::path& path, const SensorLog& log) {
  const std::string text = format_log(log);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << text;
}

SensorLog read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_log(buf.str(), path.string());
}

}  // namespace vdvio
