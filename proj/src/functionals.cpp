#include "ymh/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "ymh/errors.hpp"
#include "ymh/parallel.hpp"

namespace ymh {

std::string rational_str(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  return os.str();
}

double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

HNType::HNType(std::vector<HNEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw DomainError("HN type needs at least one entry");
  Rational deg = 0;
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (entries_[k].multiplicity < 1) throw DomainError("HN multiplicities must be >= 1");
    if (k > 0 && !(entries_[k].slope < entries_[k - 1].slope))
      throw DomainError("HN slopes must be strictly decreasing");
    rank_ += entries_[k].multiplicity;
    deg += entries_[k].slope * entries_[k].multiplicity;
  }
  for (const auto& e : entries_)
    if (e.slope.denominator() > rank_) throw DomainError("HN slope denominator exceeds the rank");
  if (deg.denominator() != 1) throw DomainError("HN type has non-integer total degree");
  degree_ = deg.numerator();
}

std::vector<Rational> HNType::expanded() const {
  std::vector<Rational> v;
  for (const auto& e : entries_) v.insert(v.end(), e.multiplicity, e.slope);
  return v;
}

std::string HNType::str() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (k) os << ',';
    os << '(' << rational_str(entries_[k].slope) << ',' << entries_[k].multiplicity << ')';
  }
  os << '}';
  return os.str();
}

double ymh_from_theta(const HermitianSiteField& theta) {
  const double w = theta.lattice->site_weight();
  return w * sum_over(theta.values.size(), [&](std::size_t s) { return theta.values[s].squaredNorm(); });
}

double ymh(const HiggsPair& pair) { return ymh_from_theta(theta_scalar(pair)); }

double psi_alpha(const std::vector<double>& eigenvalues, double alpha) {
  if (!(alpha >= 1.0)) throw DomainError("psi_alpha needs alpha >= 1");
  double total = 0.0;
  for (double l : eigenvalues) total += std::pow(std::abs(l), alpha);
  return total;
}

double ymh_weighted_from_theta(const HermitianSiteField& theta, double alpha, double shift) {
  if (!(alpha >= 1.0)) throw DomainError("weighted functional needs alpha >= 1");
  const double w = theta.lattice->site_weight();
  return w * sum_over(theta.values.size(), [&](std::size_t s) {
           const RVec ev = hermitian_eigenvalues(theta.values[s]);
           double t = 0.0;
           for (Eigen::Index k = 0; k < ev.size(); ++k) t += std::pow(std::abs(ev(k) + shift), alpha);
           return t;
         });
}

double ymh_weighted(const HiggsPair& pair, double alpha, double shift) {
  return ymh_weighted_from_theta(theta_scalar(pair), alpha, shift);
}

double hn_type_energy(const HNType& type, double alpha, double shift) {
  if (!(alpha >= 1.0)) throw DomainError("hn_type_energy needs alpha >= 1");
  double total = 0.0;
  for (const auto& e : type.entries()) total += e.multiplicity * std::pow(std::abs(to_double(e.slope) + shift), alpha);
  return kTwoPi * total;
}

Rational hn_type_energy_over_2pi(const HNType& type, int alpha, const Rational& shift) {
  if (alpha < 1) throw DomainError("hn_type_energy needs alpha >= 1");
  Rational total = 0;
  for (const auto& e : type.entries()) {
    const Rational base = abs(e.slope + shift);
    Rational p = 1;
    for (int k = 0; k < alpha; ++k) p *= base;
    total += p * e.multiplicity;
  }
  return total;
}

std::string to_string(Dominance d) {
  switch (d) {
    case Dominance::equal: return "equal";
    case Dominance::strictly_below: return "strictly-below";
    case Dominance::strictly_above: return "strictly-above";
    case Dominance::incomparable: return "incomparable";
  }
  return "?";
}

Dominance dominance_compare(const HNType& a, const HNType& b) {
  if (a.rank() != b.rank()) throw DomainError("dominance needs equal ranks");
  if (a.degree() != b.degree()) throw DomainError("dominance needs equal total degrees");
  const auto va = a.expanded();
  const auto vb = b.expanded();
  bool a_le_b = true;
  bool b_le_a = true;
  Rational sa = 0, sb = 0;
  for (std::size_t k = 0; k < va.size(); ++k) {
    sa += va[k];
    sb += vb[k];
    if (sa > sb) a_le_b = false;
    if (sb > sa) b_le_a = false;
  }
  if (a_le_b && b_le_a) return Dominance::equal;
  if (a_le_b) return Dominance::strictly_below;
  if (b_le_a) return Dominance::strictly_above;
  return Dominance::incomparable;
}

ChernWeilTerms chern_weil_terms(const HiggsPair& pair, const ProjectionField& pi) {
  validate_projection(pi);
  if (pi.rank != pair.rank || pi.values.size() != pair.lattice().sites())
    throw ProjectionError("projection does not match the pair");
  const LatticeTorus& lat = pair.lattice();
  const HermitianSiteField k = theta_scalar(pair);
  const MatField dpi = dbar_endomorphism(pair.gauge, pi.values);
  const MatField& phi = pair.higgs.values;
  ChernWeilTerms t;
  t.curvature = lat.site_weight() *
                sum_over(lat.sites(), [&](std::size_t s) { return (k.values[s] * pi.values[s]).trace().real(); });
  // |dz|^2 = |dzbar|^2 = 2 for omega = dx^dy.
  t.dbar_sq = 2.0 * l2_norm_sq(lat, dpi);
  t.bracket_sq = 2.0 * lat.site_weight() * sum_over(lat.sites(), [&](std::size_t s) {
                   return commutator(phi[s], pi.values[s]).squaredNorm();
                 });
  t.degree = (t.curvature - t.dbar_sq - t.bracket_sq) / kTwoPi;
  return t;
}

double chern_weil_degree(const HiggsPair& pair, const ProjectionField& pi) { return chern_weil_terms(pair, pi).degree; }

double bracket_identity_defect(const Eigen::MatrixXcd& phi, const Eigen::MatrixXcd& pi) {
  if (phi.rows() != pi.rows() || phi.cols() != pi.cols() || phi.rows() != phi.cols())
    throw DomainError("shape mismatch");
  if ((pi * pi - pi).cwiseAbs().maxCoeff() > 1e-10 || (pi - pi.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw ProjectionError("pi must be a Hermitian idempotent to 1e-10");
  const Eigen::MatrixXcd pp = phi * phi.adjoint() - phi.adjoint() * phi;
  const Complex lhs = (pp * pi).trace();
  const Eigen::MatrixXcd c = phi * pi - pi * phi;
  const Complex rhs = (c * c.adjoint()).trace();
  return std::abs(lhs - rhs);
}

HermitianSiteField hn_projection(const std::vector<ProjectionField>& filtration, const std::vector<double>& slopes) {
  if (filtration.empty() || filtration.size() != slopes.size())
    throw DomainError("need one slope per filtration step");
  for (std::size_t k = 1; k < slopes.size(); ++k)
    if (!(slopes[k] < slopes[k - 1])) throw DomainError("slopes must be strictly decreasing");
  const auto& lat = filtration.front().lattice;
  const int n = filtration.front().rank;
  for (const auto& p : filtration) {
    validate_projection(p);
    if (p.rank != n || p.values.size() != lat->sites()) throw ProjectionError("filtration shapes differ");
  }
  const Mat id = Mat::Identity(n, n);
  for (const auto& top : filtration.back().values)
    if (max_abs(top - id) > 1e-8) throw ProjectionError("filtration must end in the identity");
  for (std::size_t k = 0; k + 1 < filtration.size(); ++k)
    for (std::size_t s = 0; s < lat->sites(); ++s) {
      const Mat& a = filtration[k].values[s];
      if (max_abs(a * filtration[k + 1].values[s] - a) > 1e-8) throw ProjectionError("filtration is not nested");
    }
  HermitianSiteField out;
  out.lattice = lat;
  out.rank = n;
  out.values.assign(lat->sites(), Mat::Zero(n, n));
  for_each_index(lat->sites(), [&](std::size_t s) {
    Mat prev = Mat::Zero(n, n);
    for (std::size_t k = 0; k < filtration.size(); ++k) {
      out.values[s] += slopes[k] * (filtration[k].values[s] - prev);
      prev = filtration[k].values[s];
    }
    out.values[s] = herm_part(out.values[s]);
  });
  return out;
}

double lp_norm(const LatticeTorus& lat, const MatField& f, double p) {
  if (!(p >= 1.0)) throw DomainError("L^p norm needs p >= 1");
  if (std::isinf(p)) return max_over(f.size(), [&](std::size_t s) { return f[s].norm(); });
  const double total = lat.site_weight() * sum_over(f.size(), [&](std::size_t s) { return std::pow(f[s].norm(), p); });
  return std::pow(total, 1.0 / p);
}

double approx_defect(const HiggsPair& pair, const HermitianSiteField& psi, double p) {
  if (!(p >= 1.0)) throw DomainError("approx_defect needs p >= 1");
  if (psi.rank != pair.rank || psi.values.size() != pair.lattice().sites())
    throw DomainError("psi does not match the pair");
  const HermitianSiteField k = theta_scalar(pair);
  MatField diff(k.values.size());
  for_each_index(diff.size(), [&](std::size_t s) { diff[s] = k.values[s] - psi.values[s]; });
  return lp_norm(pair.lattice(), diff, p);
}

std::vector<HNType> enumerate_hn_types(int rank, long long degree, const Rational& magnitude, int denom_bound) {
  if (rank < 1) throw DomainError("rank must be positive");
  std::vector<HNType> out;
  std::vector<HNEntry> cur;
  std::function<void(int, long long)> rec = [&](int left, long long deg_left) {
    if (left == 0) {
      if (deg_left == 0) out.emplace_back(cur);
      return;
    }
    for (int m = 1; m <= left; ++m) {
      const long long dmax = static_cast<long long>(std::floor(to_double(magnitude * m) + 1e-9));
      for (long long d = dmax; d >= -dmax; --d) {
        const Rational mu(d, m);
        if (abs(mu) > magnitude || mu.denominator() > denom_bound) continue;
        if (!cur.empty() && !(mu < cur.back().slope)) continue;
        cur.push_back({mu, m});
        rec(left - m, deg_left - d);
        cur.pop_back();
      }
    }
  };
  rec(rank, degree);
  return out;
}

namespace {

std::optional<Rational> small_rational(double x) {
  for (long long q = 1; q <= 1000; ++q) {
    const double p = std::round(x * q);
    if (std::abs(p / q - x) < 1e-13 * (1.0 + std::abs(x))) return Rational(static_cast<long long>(p), q);
  }
  return std::nullopt;
}

}  // namespace

Delta0Result delta0_gap(int rank, long long degree, double alpha, double shift, const Rational& magnitude,
                        const std::optional<HNType>& base) {
  if (rank < 1 || rank > 4) throw DomainError("delta0_gap enumerates ranks 1..4 only");
  if (!(alpha >= 1.0)) throw DomainError("delta0_gap needs alpha >= 1");
  const auto types = enumerate_hn_types(rank, degree, magnitude, rank);
  if (types.empty()) throw EnumerationError("no HN type within the slope bound");
  Delta0Result r;
  r.base = base ? *base : HNType({{Rational(degree, rank), rank}});
  if (r.base.rank() != rank || r.base.degree() != degree) throw DomainError("base type has wrong rank or degree");

  const auto shift_q = small_rational(shift);
  const bool exact = std::abs(alpha - std::round(alpha)) == 0.0 && shift_q.has_value();
  if (exact) {
    const int ia = static_cast<int>(std::lround(alpha));
    const Rational e0 = hn_type_energy_over_2pi(r.base, ia, *shift_q);
    std::optional<Rational> best;
    for (const auto& t : types) {
      const Rational e = hn_type_energy_over_2pi(t, ia, *shift_q);
      if (e > e0 && (!best || e < *best)) {
        best = e;
        r.achiever = t;
      }
    }
    if (!best) throw EnumerationError("no higher type within bound");
    r.delta0_over_2pi = (*best - e0) / 2;
    r.delta0 = kTwoPi * to_double(*r.delta0_over_2pi);
    return r;
  }
  const double e0 = hn_type_energy(r.base, alpha, shift);
  std::optional<double> best;
  for (const auto& t : types) {
    const double e = hn_type_energy(t, alpha, shift);
    if (e > e0 + 1e-12 * (1.0 + e0) && (!best || e < *best)) {
      best = e;
      r.achiever = t;
    }
  }
  if (!best) throw EnumerationError("no higher type within bound");
  r.delta0 = 0.5 * (*best - e0);
  return r;
}

Rational minimal_nonnegative_shift(const std::vector<HNType>& types) {
  Rational shift = 0;
  for (const auto& t : types)
    for (const auto& e : t.entries())
      if (-e.slope > shift) shift = -e.slope;
  return shift;
}

}  // namespace ymh
