// JSON form of predictor parameters: nested objects of named matrices, each
// matrix an array of rows.

#include "evc/error.hpp"
#include "evc/nn.hpp"
#include "json.hpp"

namespace evc::nn {

using nlohmann::json;

namespace {

json MatToJson(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json VecToJson(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Mat MatFromJson(const json& j) {
  if (!j.is_array()) Fail(ErrorCode::kSchema, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      Fail(ErrorCode::kSchema, "matrix rows differ in length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Vec VecFromJson(const json& j) {
  if (!j.is_array()) Fail(ErrorCode::kSchema, "vector must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json ConvToJson(const Conv1d& c) {
  json taps = json::array();
  for (const auto& t : c.taps) taps.push_back(MatToJson(t));
  return {{"taps", std::move(taps)}, {"bias", VecToJson(c.bias)}};
}

Conv1d ConvFromJson(const json& j) {
  Conv1d c;
  for (const auto& t : j.at("taps")) c.taps.push_back(MatFromJson(t));
  c.bias = VecFromJson(j.at("bias"));
  return c;
}

json NormToJson(const LayerNorm& n) {
  return {{"gamma", VecToJson(n.gamma)}, {"beta", VecToJson(n.beta)}, {"eps", n.eps}};
}

LayerNorm NormFromJson(const json& j) {
  return {VecFromJson(j.at("gamma")), VecFromJson(j.at("beta")), j.at("eps").get<double>()};
}

}  // namespace

std::string PredictorParamsToJson(const PredictorParams& p) {
  json blocks = json::array();
  for (const auto& b : p.blocks) {
    blocks.push_back({
        {"attention",
         {{"wq", MatToJson(b.attention.wq)},
          {"wk", MatToJson(b.attention.wk)},
          {"wv", MatToJson(b.attention.wv)},
          {"wo", MatToJson(b.attention.wo)}}},
        {"norm1", NormToJson(b.norm1)},
        {"conv1", ConvToJson(b.conv1)},
        {"conv2", ConvToJson(b.conv2)},
        {"norm2", NormToJson(b.norm2)},
    });
  }
  json j = {
      {"head", p.head == PredictorHead::kFe ? "fe" : "duration"},
      {"blocks", std::move(blocks)},
      {"head_weight", MatToJson(p.head_weight)},
      {"head_bias", VecToJson(p.head_bias)},
  };
  return j.dump();
}

PredictorParams PredictorParamsFromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    PredictorParams p;
    const auto head = j.at("head").get<std::string>();
    if (head == "fe") {
      p.head = PredictorHead::kFe;
    } else if (head == "duration") {
      p.head = PredictorHead::kDuration;
    } else {
      Fail(ErrorCode::kSchema, "unknown predictor head `" + head + "`");
    }
    for (const auto& b : j.at("blocks")) {
      PredictorBlock blk;
      const auto& a = b.at("attention");
      blk.attention = {MatFromJson(a.at("wq")), MatFromJson(a.at("wk")), MatFromJson(a.at("wv")),
                       MatFromJson(a.at("wo"))};
      blk.norm1 = NormFromJson(b.at("norm1"));
      blk.conv1 = ConvFromJson(b.at("conv1"));
      blk.conv2 = ConvFromJson(b.at("conv2"));
      blk.norm2 = NormFromJson(b.at("norm2"));
      p.blocks.push_back(std::move(blk));
    }
    p.head_weight = MatFromJson(j.at("head_weight"));
    p.head_bias = VecFromJson(j.at("head_bias"));
    p.Validate();
    return p;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kSchema, std::string("predictor params: ") + e.what());
  }
}

}  // namespace evc::nn
