#include "dcfair/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace dcfair {

LinearCrossModel::LinearCrossModel(int d_in, Vec w) : d(d_in), weights(std::move(w)) {
  if (static_cast<int>(weights.size()) != weight_len(d)) {
    throw ModelError("weight length must be 2d+2");
  }
  for (double v : weights) {
    if (!std::isfinite(v)) throw ModelError("non-finite weight");
  }
}

Vec featurize(const Vec& x, int group) {
  const int d = static_cast<int>(x.size());
  Vec out;
  out.reserve(2 * d + 2);
  out.push_back(1.0);
  out.insert(out.end(), x.begin(), x.end());
  const double g = static_cast<double>(group);
  out.push_back(g);
  for (double v : x) out.push_back(g * v);
  return out;
}

double score_row(const Vec& weights, int d, const double* x, int group) {
  const double g = static_cast<double>(group);
  double sx = 0.0, sgx = 0.0;
  const double* wx = weights.data() + 1;
  const double* wgx = weights.data() + d + 2;
  for (int j = 0; j < d; ++j) {
    sx += wx[j] * x[j];
    sgx += wgx[j] * x[j];
  }
  return weights[0] + sx + g * weights[d + 1] + g * sgx;
}

double score(const LinearCrossModel& model, const Vec& x, int group) {
  if (static_cast<int>(x.size()) != model.d) {
    throw ModelError("feature dimension mismatch: expected " +
                     std::to_string(model.d) + ", got " +
                     std::to_string(x.size()));
  }
  return score_row(model.weights, model.d, x.data(), group);
}

void add_scaled_cross(Vec& out, int d, const double* x, int group, double c) {
  const double g = static_cast<double>(group);
  out[0] += c;
  double* ox = out.data() + 1;
  double* ogx = out.data() + d + 2;
  const double cg = c * g;
  for (int j = 0; j < d; ++j) {
    ox[j] += c * x[j];
    ogx[j] += cg * x[j];
  }
  out[d + 1] += cg;
}

DecisionVector pack(const Vec& model_weights, const Vec& thetas) {
  DecisionVector v;
  v.layout.model_len = static_cast<int>(model_weights.size());
  v.layout.theta_len = static_cast<int>(thetas.size());
  v.packed = model_weights;
  v.packed.insert(v.packed.end(), thetas.begin(), thetas.end());
  return v;
}

std::pair<Vec, Vec> unpack(const DecisionVector& v) {
  if (static_cast<int>(v.packed.size()) != v.layout.total()) {
    throw ModelError("packed length does not match layout");
  }
  Vec w(v.packed.begin(), v.packed.begin() + v.layout.model_len);
  Vec t(v.packed.begin() + v.layout.model_len, v.packed.end());
  return {std::move(w), std::move(t)};
}

FeasibleDomain FeasibleDomain::all_space() { return FeasibleDomain(); }

FeasibleDomain FeasibleDomain::l2_ball(double radius) {
  if (!(radius > 0.0)) throw ModelError("ball radius must be positive");
  FeasibleDomain d;
  d.kind_ = Kind::L2Ball;
  d.radius_ = radius;
  return d;
}

FeasibleDomain FeasibleDomain::box(Vec lower, Vec upper) {
  if (lower.size() != upper.size()) throw ModelError("box bound length mismatch");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) throw ModelError("box lower bound exceeds upper");
  }
  FeasibleDomain d;
  d.kind_ = Kind::Box;
  d.lower_ = std::move(lower);
  d.upper_ = std::move(upper);
  return d;
}

Vec FeasibleDomain::project(const Vec& v) const {
  switch (kind_) {
    case Kind::AllSpace:
      return v;
    case Kind::L2Ball: {
      const double nrm = norm2(v);
      if (nrm <= radius_) return v;
      Vec out = v;
      const double s = radius_ / nrm;
      for (double& e : out) e *= s;
      return out;
    }
    case Kind::Box: {
      Vec out = v;
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::clamp(out[i], lower_[i], upper_[i]);
      }
      return out;
    }
  }
  return v;
}

void save_model_json(const std::string& path, int d, const DecisionVector& v) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write model file: " + path);
  char buf[64];
  out << "{\n  \"d\": " << d << ",\n  \"layout\": {\"model_len\": "
      << v.layout.model_len << ", \"theta_len\": " << v.layout.theta_len
      << "},\n  \"packed\": [";
  for (std::size_t i = 0; i < v.packed.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", v.packed[i]);
    out << (i ? ", " : "") << buf;
  }
  out << "]\n}\n";
}

LoadedModel load_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ModelError(std::string("model file is not valid JSON: ") + e.what());
  }
  LoadedModel m;
  try {
    m.d = j.at("d").get<int>();
    m.decision.layout.model_len = j.at("layout").at("model_len").get<int>();
    m.decision.layout.theta_len = j.at("layout").at("theta_len").get<int>();
    m.decision.packed = j.at("packed").get<Vec>();
  } catch (const std::exception& e) {
    throw ModelError(std::string("model file missing fields: ") + e.what());
  }
  if (m.decision.layout.model_len != LinearCrossModel::weight_len(m.d)) {
    throw ModelError("model_len inconsistent with d");
  }
  if (static_cast<int>(m.decision.packed.size()) != m.decision.layout.total()) {
    throw ModelError("packed length does not match layout");
  }
  return m;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sqnorm(const Vec& a) { return dot(a, a); }

double norm2(const Vec& a) { return std::sqrt(sqnorm(a)); }

void axpy(Vec& y, double a, const Vec& x) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

}  // namespace dcfair
