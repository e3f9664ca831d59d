#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "ymh/fields.hpp"

namespace ymh {

using Rational = boost::rational<long long>;

struct HNEntry {
  Rational slope;
  int multiplicity = 1;
  friend bool operator==(const HNEntry&, const HNEntry&) = default;
};

/// Slopes with multiplicities, strictly decreasing. Total degree must be an
/// integer and every slope must have denominator <= rank.
class HNType {
 public:
  HNType() = default;
  explicit HNType(std::vector<HNEntry> entries);

  const std::vector<HNEntry>& entries() const noexcept { return entries_; }
  int rank() const noexcept { return rank_; }
  long long degree() const noexcept { return degree_; }
  /// The full slope vector (mu_1 >= ... >= mu_n).
  std::vector<Rational> expanded() const;
  /// e.g. "{(1,1),(-1,1)}" or "{(1/2,2)}".
  std::string str() const;

  friend bool operator==(const HNType& a, const HNType& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<HNEntry> entries_;
  int rank_ = 0;
  long long degree_ = 0;
};

std::string rational_str(const Rational& r);
double to_double(const Rational& r);

double ymh(const HiggsPair& pair);
/// a^2 Sum |K|_F^2 for a precomputed curvature operator.
double ymh_from_theta(const HermitianSiteField& theta);

double psi_alpha(const std::vector<double>& eigenvalues, double alpha);
double ymh_weighted(const HiggsPair& pair, double alpha, double shift);
double ymh_weighted_from_theta(const HermitianSiteField& theta, double alpha, double shift);
double hn_type_energy(const HNType& type, double alpha, double shift);
/// hn_type_energy / (2 pi) as an exact rational; only for integer alpha.
Rational hn_type_energy_over_2pi(const HNType& type, int alpha, const Rational& shift);

enum class Dominance { equal, strictly_below, strictly_above, incomparable };
std::string to_string(Dominance d);

/// Partial-sum dominance: A <= B iff every partial sum of A's slope vector
/// is <= the matching partial sum of B's. The published definition writes
/// "=" for each partial sum, which would collapse the order to equality; the
/// inequality is the intended one.
Dominance dominance_compare(const HNType& a, const HNType& b);

struct ChernWeilTerms {
  double curvature = 0.0;   // Sum Tr(K pi) a^2
  double dbar_sq = 0.0;     // ||d'' pi||^2
  double bracket_sq = 0.0;  // ||[phi, pi]||^2
  double degree = 0.0;      // (curvature - dbar_sq - bracket_sq) / 2pi
};

ChernWeilTerms chern_weil_terms(const HiggsPair& pair, const ProjectionField& pi);
double chern_weil_degree(const HiggsPair& pair, const ProjectionField& pi);

/// |Tr([Phi,Phi^dagger] pi) - |[Phi,pi]|^2|. The two agree when the range of
/// pi is Phi-invariant; in general the difference is 2 |(1-pi) Phi pi|^2.
/// Any square size (not limited to kMaxRank).
double bracket_identity_defect(const Eigen::MatrixXcd& phi, const Eigen::MatrixXcd& pi);

/// Sum_i mu_i (pi_i - pi_{i-1}) for a nested filtration ending in Id.
HermitianSiteField hn_projection(const std::vector<ProjectionField>& filtration, const std::vector<double>& slopes);

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// L^p distance between sqrt(-1) Lambda Theta and psi (p = kInfNorm allowed).
double approx_defect(const HiggsPair& pair, const HermitianSiteField& psi, double p);
double lp_norm(const LatticeTorus& lattice, const MatField& f, double p);

/// All HN types of the given rank and degree whose quotients have integer
/// degree, slope denominators <= denom_bound and |slope| <= magnitude.
std::vector<HNType> enumerate_hn_types(int rank, long long degree, const Rational& magnitude, int denom_bound);

struct Delta0Result {
  double delta0 = 0.0;
  HNType base;
  HNType achiever;
  /// delta0 / (2 pi) when the energies are exact rationals.
  std::optional<Rational> delta0_over_2pi;
};

/// Half the gap between E(base) and the next larger HN-type energy, with E =
/// hn_type_energy(., alpha, shift). The base type defaults to the
/// semistable {(k/n, n)}; slope denominators are bounded by the rank.
Delta0Result delta0_gap(int rank, long long degree, double alpha, double shift, const Rational& magnitude,
                        const std::optional<HNType>& base = std::nullopt);

/// Smallest N >= 0 making every slope of every listed type non-negative.
Rational minimal_nonnegative_shift(const std::vector<HNType>& types);

}  // namespace ymh
