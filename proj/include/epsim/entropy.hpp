#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epsim/function_class.hpp"

namespace epsim {

/// An epsilon-net H(eps) of class members together with its Gram matrix.
struct Grid {
  double epsilon = 0.0;
  std::vector<Param> centers;
  Eigen::MatrixXd gram;
  std::string source;  // distribution identifier

  [[nodiscard]] std::size_t size() const { return centers.size(); }
};

inline constexpr std::size_t kDefaultMeshSize = 1000;
inline constexpr std::size_t kDefaultCenterBudget = 4096;

/// Greedy open-ball epsilon-net of `mesh`: the first uncovered mesh member
/// anchors each step and the center is the member within epsilon of the
/// anchor that covers the most still-uncovered members.
/// Throws CapacityError once more than `center_budget` centers are needed.
Grid build_grid(const ClassModel& model, double epsilon, const std::vector<Param>& mesh,
                std::size_t center_budget = kDefaultCenterBudget, const ExecPolicy& policy = {});
Grid build_grid(const ClassModel& model, double epsilon,
                std::size_t mesh_size = kDefaultMeshSize,
                std::size_t center_budget = kDefaultCenterBudget);

/// Covering number on a finite mesh, as a certified sandwich.
struct CoverResult {
  std::size_t upper = 0;  // size of an explicit cover
  std::size_t lower = 0;  // size of a closed 2eps-separated packing
  bool exact = false;     // true when found by exhaustive set cover
  std::string method;

  [[nodiscard]] std::size_t value() const { return upper; }
};

/// Meshes of at most this size are solved by exhaustive set cover.
inline constexpr std::size_t kExactCoverLimit = 24;

CoverResult covering_number_dP(const ClassModel& model, double epsilon,
                               const std::vector<Param>& mesh, const ExecPolicy& policy = {});

/// Exhaustive minimum set cover with open epsilon balls centered at mesh
/// members. Limited to kExactCoverLimit members.
std::size_t exact_cover_size(const Eigen::MatrixXd& distances, double epsilon);

/// One epsilon-bracket [lower, upper] and the mesh members it contains.
struct Bracket {
  std::vector<std::size_t> members;
  double width = 0.0;  // d_P(lower, upper)
};

struct BracketResult {
  std::vector<Bracket> brackets;
  [[nodiscard]] std::size_t count() const { return brackets.size(); }
};

/// Greedy epsilon-brackets (d_P(l, u) < epsilon) covering every mesh member:
/// nested chains for intervals, box hulls for rectangles, piecewise-constant
/// knot-segment envelopes for Holder balls. Finite lists are unsupported.
BracketResult bracketing(const ClassModel& model, double epsilon, const std::vector<Param>& mesh);
std::size_t bracketing_number(const ClassModel& model, double epsilon,
                              const std::vector<Param>& mesh);

/// Which entropy is being counted.
enum class CountKind { Covering, Bracketing };

struct EntropyReport {
  std::vector<double> epsilons;
  std::vector<double> counts;
  EntropyRegime::Kind regime = EntropyRegime::Kind::VC;
  double c0 = 0.0;
  double nu0 = 0.0;
  double b0 = 0.0;
  double r0 = 0.0;
  double residual = 0.0;
};

/// Least-squares constants: (VC) log N on log(1/eps); (BR) log log N on log(1/eps).
EntropyReport fit_entropy_counts(const std::vector<double>& epsilons,
                                 const std::vector<double>& counts, EntropyRegime::Kind regime);
/// Counts at each radius (monotone envelope of the mesh upper bounds) then fits.
EntropyReport fit_entropy(const ClassModel& model, const std::vector<double>& epsilons,
                          const std::vector<Param>& mesh, EntropyRegime::Kind regime,
                          CountKind count_kind, const ExecPolicy& policy = {});

}  // namespace epsim
