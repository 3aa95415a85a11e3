#pragma once

// Trained-model file:
//
//   ASAPMODEL/1\n
//   <one-line JSON layout descriptor>\n
//   payload: little-endian float64 values in the order listed by "payload";
//            matrices row-major.

#include "asap/erp.hpp"
#include "asap/error.hpp"
#include "asap/eval.hpp"
#include "asap/io.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace asap {

inline constexpr const char* kModelMagic = "ASAPMODEL/1";

inline std::string serialize_model(const TrainedPipeline& p) {
  const auto order = p.model.order();
  const auto channels = p.prototype.P.rows();
  const auto samples = p.prototype.P.cols();
  if (order != 2 * channels) throw Error(ErrorCode::DimensionMismatch, "model order must be twice the prototype channels");

  const nlohmann::json layout = {
      {"order", order},
      {"channels", channels},
      {"samples", samples},
      {"encoding", "f64le"},
      {"matrix_layout", "row-major"},
      {"payload", {"sigma_T", "sigma_NT", "center_T", "center_NT", "prototype"}},
  };
  std::string out = std::string(kModelMagic) + "\n" + layout.dump() + "\n";
  io::append_le(out, p.model.sigma_T);
  io::append_le(out, p.model.sigma_NT);
  auto put = [&](const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) io::append_le(out, m(r, c));
  };
  put(p.model.center_T.matrix());
  put(p.model.center_NT.matrix());
  put(p.prototype.P);
  return out;
}

inline TrainedPipeline deserialize_model(const std::string& bytes, const std::string& name = "model") {
  const auto nl1 = bytes.find('\n');
  if (nl1 == std::string::npos || bytes.compare(0, nl1, kModelMagic) != 0) {
    throw Error(ErrorCode::FormatError, name + ": missing " + std::string(kModelMagic) + " header");
  }
  const auto nl2 = bytes.find('\n', nl1 + 1);
  if (nl2 == std::string::npos) throw Error(ErrorCode::FormatError, name + ": truncated layout line");

  Eigen::Index order = 0, channels = 0, samples = 0;
  try {
    const auto layout = nlohmann::json::parse(bytes.substr(nl1 + 1, nl2 - nl1 - 1));
    order = layout.at("order").get<Eigen::Index>();
    channels = layout.at("channels").get<Eigen::Index>();
    samples = layout.at("samples").get<Eigen::Index>();
    if (layout.at("encoding").get<std::string>() != "f64le") throw Error(ErrorCode::FormatError, name + ": unsupported encoding");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, name + ": bad layout: " + e.what());
  }
  if (order <= 0 || order != 2 * channels || samples < 2) throw Error(ErrorCode::FormatError, name + ": inconsistent dimensions");

  const auto expected = static_cast<std::size_t>(8 * (2 + 2 * order * order + channels * samples));
  const char* p = bytes.data() + nl2 + 1;
  if (bytes.size() - (nl2 + 1) != expected) {
    throw Error(ErrorCode::FormatError, name + ": payload is " + std::to_string(bytes.size() - nl2 - 1) +
                                            " bytes, expected " + std::to_string(expected));
  }
  auto next = [&]() {
    const double v = io::read_le<double>(p);
    p += 8;
    return v;
  };
  auto get = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = next();
    return m;
  };
  const double sigma_T = next();
  const double sigma_NT = next();
  if (!(sigma_T > 0.0) || !(sigma_NT > 0.0)) throw Error(ErrorCode::FormatError, name + ": sigmas must be positive");
  SpdMatrix cT = validate_spd(get(order, order));
  SpdMatrix cNT = validate_spd(get(order, order));
  Prototype proto{get(channels, samples)};
  return TrainedPipeline{std::move(proto), ClassModel{std::move(cT), std::move(cNT), sigma_T, sigma_NT}};
}

inline void save_model(const TrainedPipeline& p, const std::filesystem::path& path) {
  io::write_atomic(path, serialize_model(p));
}

inline TrainedPipeline load_model(const std::filesystem::path& path) {
  return deserialize_model(io::read_file(path), path.string());
}

}  // namespace asap
