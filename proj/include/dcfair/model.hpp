#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dcfair {

using Vec = std::vector<double>;

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear score model with group cross terms:
//   h_w(x, g) = <w, (1, x, g, g*x)>,  w in R^{2d+2}.
// The group id enters as its integer value cast to real.
struct LinearCrossModel {
  int d = 0;
  Vec weights;  // length 2d+2: (bias, x-block, g-coeff, g*x-block)

  LinearCrossModel() = default;
  LinearCrossModel(int d_in, Vec w);
  static int weight_len(int d) { return 2 * d + 2; }
};

// Returns (1, x, g, g*x), length 2d+2.
Vec featurize(const Vec& x, int group);

double score(const LinearCrossModel& model, const Vec& x, int group);

// Score for a raw feature row (pointer form used in hot loops).
double score_row(const Vec& weights, int d, const double* x, int group);

// out += c * (1, x, g, g*x); out must have length >= 2d+2.
void add_scaled_cross(Vec& out, int d, const double* x, int group, double c);

// Layout of the packed decision vector: model weights followed by the
// auxiliary thresholds theta_p (theta_len == 0 when there are none).
struct PackedLayout {
  int model_len = 0;
  int theta_len = 0;
  int total() const { return model_len + theta_len; }
};

struct DecisionVector {
  Vec packed;
  PackedLayout layout;
};

DecisionVector pack(const Vec& model_weights, const Vec& thetas);
std::pair<Vec, Vec> unpack(const DecisionVector& v);

// Feasible domain W: all of R^n, an origin-centered L2 ball, or a box.
class FeasibleDomain {
 public:
  enum class Kind { AllSpace, L2Ball, Box };

  static FeasibleDomain all_space();
  static FeasibleDomain l2_ball(double radius);
  static FeasibleDomain box(Vec lower, Vec upper);

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }

  // Euclidean projection onto the domain.
  Vec project(const Vec& v) const;

 private:
  Kind kind_ = Kind::AllSpace;
  double radius_ = 0.0;
  Vec lower_, upper_;
};

// Model file format: JSON {d, layout:{model_len,theta_len}, packed:[...]}
// with floats printed to 17 significant digits.
void save_model_json(const std::string& path, int d, const DecisionVector& v);
struct LoadedModel {
  int d = 0;
  DecisionVector decision;
  LinearCrossModel model() const {
    return LinearCrossModel(d, Vec(decision.packed.begin(),
                                   decision.packed.begin() + decision.layout.model_len));
  }
};
LoadedModel load_model_json(const std::string& path);

// Small dense-vector helpers shared across modules.
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double sqnorm(const Vec& a);
void axpy(Vec& y, double a, const Vec& x);  // y += a*x

}  // namespace dcfair
