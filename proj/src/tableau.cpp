#include "fvi/tableau.hpp"

#include <cmath>
#include <string>

#include "fvi/error.hpp"

namespace fvi {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kUnsupportedStageCount: return "unsupported stage count";
    case ErrorKind::kStabilityPole: return "stability pole";
    case ErrorKind::kContourDegeneracy: return "contour degeneracy";
    case ErrorKind::kIndexOutOfRange: return "index out of range";
    case ErrorKind::kDegenerateNodes: return "degenerate nodes";
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kNewtonFailure: return "newton failure";
    case ErrorKind::kHistoryIncomplete: return "history incomplete";
    case ErrorKind::kGammaPole: return "gamma pole";
    case ErrorKind::kShapeMismatch: return "shape mismatch";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

ButcherTableau::ButcherTableau(std::string label, Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c,
                               int order, int stage_order)
    : label_(std::move(label)),
      a_(std::move(a)),
      b_(std::move(b)),
      c_(std::move(c)),
      order_(order),
      stage_order_(stage_order) {
  const auto r = b_.size();
  if (r == 0 || a_.rows() != r || a_.cols() != r || c_.size() != r) {
    throw Error(ErrorKind::kShapeMismatch, "tableau " + label_ + " has inconsistent sizes");
  }
  if (std::abs(b_.sum() - 1.0) > 1e-14) {
    throw Error(ErrorKind::kInvalidArgument, "tableau " + label_ + " weights do not sum to one");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a_);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::kInvalidArgument, "tableau " + label_ + " has singular A");
  }
  a_inv_ = lu.inverse();
}

bool ButcherTableau::has_endpoint_stages() const {
  return stages() >= 2 && c_(0) == 0.0 && c_(stages() - 1) == 1.0;
}

ButcherTableau lobatto_iiic(int r) {
  Eigen::MatrixXd a(r, r);
  Eigen::VectorXd b(r), c(r);
  switch (r) {
    case 2:
      a << 0.5, -0.5,
           0.5, 0.5;
      b << 0.5, 0.5;
      c << 0.0, 1.0;
      break;
    case 3:
      a << 1.0 / 6.0, -1.0 / 3.0, 1.0 / 6.0,
           1.0 / 6.0, 5.0 / 12.0, -1.0 / 12.0,
           1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0;
      b << 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0;
      c << 0.0, 0.5, 1.0;
      break;
    case 4: {
      const double s5 = std::sqrt(5.0);
      a << 1.0 / 12.0, -s5 / 12.0, s5 / 12.0, -1.0 / 12.0,
           1.0 / 12.0, 0.25, (10.0 - 7.0 * s5) / 60.0, s5 / 60.0,
           1.0 / 12.0, (10.0 + 7.0 * s5) / 60.0, 0.25, -s5 / 60.0,
           1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0;
      b << 1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0;
      c << 0.0, (5.0 - s5) / 10.0, (5.0 + s5) / 10.0, 1.0;
      break;
    }
    default:
      throw Error(ErrorKind::kUnsupportedStageCount,
                  "Lobatto IIIC is provided for r = 2, 3, 4; got " + std::to_string(r));
  }
  return ButcherTableau("lobatto" + std::to_string(r), a, b, c, 2 * r - 2, r - 1);
}

ButcherTableau midpoint() {
  Eigen::MatrixXd a(1, 1);
  a << 0.5;
  Eigen::VectorXd b(1), c(1);
  b << 1.0;
  c << 0.5;
  return ButcherTableau("midpoint", a, b, c, 2, 1);
}

ButcherTableau tableau_by_name(std::string_view name) {
  if (name == "lobatto2") return lobatto_iiic(2);
  if (name == "lobatto3") return lobatto_iiic(3);
  if (name == "lobatto4") return lobatto_iiic(4);
  if (name == "midpoint" || name == "midcq") return midpoint();
  throw Error(ErrorKind::kInvalidArgument, "unknown tableau '" + std::string(name) + "'");
}

std::complex<double> stability(const ButcherTableau& tab, std::complex<double> z) {
  const int r = tab.stages();
  const Eigen::MatrixXcd m =
      Eigen::MatrixXcd::Identity(r, r) - z * tab.a().cast<std::complex<double>>();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::kStabilityPole, "I - zA is singular at z = (" + std::to_string(z.real()) + ", " +
                                               std::to_string(z.imag()) + ")");
  }
  const Eigen::VectorXcd y = lu.solve(Eigen::VectorXcd::Ones(r));
  return 1.0 + z * tab.b().cast<std::complex<double>>().dot(y);
}

Eigen::MatrixXcd gamma(const ButcherTableau& tab, std::complex<double> z) {
  const int r = tab.stages();
  const Eigen::MatrixXcd a_inv = tab.a_inverse().cast<std::complex<double>>();
  const Eigen::VectorXcd u = a_inv * Eigen::VectorXcd::Ones(r);
  const Eigen::RowVectorXcd v = tab.b().cast<std::complex<double>>().transpose() * a_inv;
  return a_inv - z * (u * v);
}

}  // namespace fvi
