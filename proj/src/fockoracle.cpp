#include "bellturb/fockoracle.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <variant>

#include "bellturb/error.hpp"

namespace bellturb {

namespace {

constexpr double kMaxBuildTail = 1e-8;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

// n = n1 + n2 enumerated in blocks of fixed total, n2 ascending inside a block.
int block_offset(int n) { return n * (n + 1) / 2; }

struct ModeRef {
  bool site_a;
  bool first;
};

ModeRef mode_ref(Mode m) {
  switch (m) {
    case Mode::A1: return {true, true};
    case Mode::A2: return {true, false};
    case Mode::B1: return {false, true};
    case Mode::B2: return {false, false};
  }
  return {true, true};
}

}  // namespace

SiteBasis::SiteBasis(int cutoff) : cutoff_(cutoff), dim_(block_offset(cutoff + 1)) {
  if (cutoff < 0) throw DomainError("Fock cutoff must be non-negative");
  occupation_.resize(dim_);
  for (int n = 0; n <= cutoff; ++n) {
    for (int n2 = 0; n2 <= n; ++n2) occupation_[block_offset(n) + n2] = {n - n2, n2};
  }
}

int SiteBasis::index(int n1, int n2) const {
  if (n1 < 0 || n2 < 0 || n1 + n2 > cutoff_) return -1;
  return block_offset(n1 + n2) + n2;
}

double FockState4::amplitude(int n_ha, int n_va, int n_hb, int n_vb) const {
  const SiteBasis basis(cutoff);
  const int a = basis.index(n_ha, n_va);
  const int b = basis.index(n_hb, n_vb);
  if (a < 0 || b < 0) return 0.0;
  return amplitudes[a + basis.dim() * b];
}

double pdc_truncation_tail(double xi, int cutoff) {
  if (!std::isfinite(xi) || xi < 0.0) throw DomainError("squeezing parameter must be finite and >= 0");
  const double th = std::tanh(xi);
  const double t = th * th;
  // Sum_{n>N} (n+1) t^n (1-t)^2 = t^{N+1} ((N+2) - (N+1) t).
  return std::pow(t, cutoff + 1) * ((cutoff + 2) - (cutoff + 1) * t);
}

int pdc_cutoff_for(double xi, double tol) {
  for (int n = 0; n <= kMaxOracleCutoff; ++n) {
    if (pdc_truncation_tail(xi, n) < tol) return n;
  }
  std::ostringstream msg;
  msg << "cutoff too small: xi=" << xi << " needs more than " << kMaxOracleCutoff
      << " photons per site for a truncation tail below " << tol << " (tail at cutoff "
      << kMaxOracleCutoff << " is " << pdc_truncation_tail(xi, kMaxOracleCutoff) << ")";
  throw CutoffError(msg.str());
}

FockState4 build_pdc_state(double xi, int cutoff) {
  const double tail = pdc_truncation_tail(xi, cutoff);
  if (tail > kMaxBuildTail) {
    std::ostringstream msg;
    msg << "cutoff too small: truncation tail " << tail << " at xi=" << xi << ", cutoff=" << cutoff
        << " exceeds " << kMaxBuildTail;
    throw CutoffError(msg.str());
  }
  const SiteBasis basis(cutoff);
  FockState4 s;
  s.cutoff = cutoff;
  s.amplitudes = Eigen::VectorXd::Zero(basis.dim() * basis.dim());
  const double ch = std::cosh(xi);
  const double th = std::tanh(xi);
  for (int n = 0; n <= cutoff; ++n) {
    // sqrt(n+1) tanh^n xi / cosh^2 xi times the 1/sqrt(n+1) of the n-pair component.
    const double weight = std::pow(th, n) / (ch * ch);
    for (int m = 0; m <= n; ++m) {
      const int a = basis.index(n - m, m);
      const int b = basis.index(m, n - m);
      s.amplitudes[a + basis.dim() * b] = (m % 2 == 0 ? 1.0 : -1.0) * weight;
    }
  }
  return s;
}

FockState4 build_bell_state(int cutoff) {
  if (cutoff < 1) throw CutoffError("the Bell state needs a cutoff of at least one photon per site");
  const SiteBasis basis(cutoff);
  FockState4 s;
  s.cutoff = cutoff;
  s.amplitudes = Eigen::VectorXd::Zero(basis.dim() * basis.dim());
  s.amplitudes[basis.index(1, 0) + basis.dim() * basis.index(0, 1)] = std::numbers::sqrt2 / 2.0;
  s.amplitudes[basis.index(0, 1) + basis.dim() * basis.index(1, 0)] = -std::numbers::sqrt2 / 2.0;
  return s;
}

Density to_density(const FockState4& state) {
  return {state.cutoff, state.amplitudes * state.amplitudes.transpose()};
}

Density apply_loss(const Density& density, double eta, Mode mode) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("loss transmittance must lie in [0,1]");
  if (eta == 1.0) return density;
  const SiteBasis basis(density.cutoff);
  const int d = basis.dim();
  const int big = d * d;
  const int nmax = density.cutoff;
  const ModeRef ref = mode_ref(mode);

  // For every basis state x: photon number in the mode, and the index of x
  // with k extra photons in that mode (-1 outside the support).
  std::vector<int> count(big);
  std::vector<int> shifted(static_cast<std::size_t>(big) * (nmax + 1), -1);
  for (int x = 0; x < big; ++x) {
    const int a = x % d;
    const int b = x / d;
    const int site = ref.site_a ? a : b;
    const int n1 = basis.n1(site);
    const int n2 = basis.n2(site);
    count[x] = ref.first ? n1 : n2;
    for (int k = 0; k <= nmax; ++k) {
      const int moved = ref.first ? basis.index(n1 + k, n2) : basis.index(n1, n2 + k);
      if (moved < 0) break;
      shifted[static_cast<std::size_t>(x) * (nmax + 1) + k] = ref.site_a ? moved + d * b : a + d * moved;
    }
  }

  // Kraus_k |n> = sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k>.
  Eigen::MatrixXd amp(nmax + 1, nmax + 1);
  for (int n = 0; n <= nmax; ++n) {
    for (int k = 0; k <= nmax; ++k) {
      amp(n, k) = k <= n ? std::sqrt(binomial(n, k) * std::pow(eta, n - k) * std::pow(1.0 - eta, k)) : 0.0;
    }
  }

  Density out{density.cutoff, Eigen::MatrixXd::Zero(big, big)};
  for (int y = 0; y < big; ++y) {
    for (int x = 0; x < big; ++x) {
      double acc = 0.0;
      for (int k = 0; k <= nmax; ++k) {
        const int xs = shifted[static_cast<std::size_t>(x) * (nmax + 1) + k];
        const int ys = shifted[static_cast<std::size_t>(y) * (nmax + 1) + k];
        if (xs < 0 || ys < 0) break;
        acc += amp(count[x] + k, k) * amp(count[y] + k, k) * density.rho(xs, ys);
      }
      out.rho(x, y) = acc;
    }
  }
  return out;
}

Eigen::MatrixXd site_rotation(const SiteBasis& basis, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(basis.dim(), basis.dim());
  for (int in = 0; in < basis.dim(); ++in) {
    const int nh = basis.n1(in);
    const int nv = basis.n2(in);
    const int n = nh + nv;
    const double norm_in = std::sqrt(factorial(nh) * factorial(nv));
    // (c T - s R)^nh (s T + c R)^nv acting on vacuum.
    for (int i = 0; i <= nh; ++i) {
      const double ci = binomial(nh, i) * std::pow(c, i) * std::pow(-s, nh - i);
      for (int j = 0; j <= nv; ++j) {
        const double cj = binomial(nv, j) * std::pow(s, j) * std::pow(c, nv - j);
        const int k = i + j;
        const int out = basis.index(k, n - k);
        u(out, in) += ci * cj * std::sqrt(factorial(k) * factorial(n - k)) / norm_in;
      }
    }
  }
  return u;
}

Density rotate_site(const Density& density, double theta, Site site) {
  const SiteBasis basis(density.cutoff);
  const int d = basis.dim();
  const int big = d * d;
  const Eigen::MatrixXd u = site_rotation(basis, theta);

  // rho -> W rho W^T with W = U (x) 1 or 1 (x) U in the index a + d b.
  auto left = [&](Eigen::MatrixXd& m) {
    if (site == Site::A) {
      Eigen::Map<Eigen::MatrixXd> view(m.data(), d, static_cast<Eigen::Index>(d) * big);
      view = (u * view).eval();
    } else {
      for (int y = 0; y < big; ++y) {
        Eigen::Map<Eigen::MatrixXd> block(m.data() + static_cast<std::ptrdiff_t>(y) * big, d, d);
        block = (block * u.transpose()).eval();
      }
    }
  };
  Eigen::MatrixXd m = density.rho;
  left(m);
  m.transposeInPlace();
  left(m);
  m.transposeInPlace();
  return {density.cutoff, std::move(m)};
}

PatternProbs click_pattern_probs(const Density& density, const DetectorParams& detector) {
  detector.validate();
  const SiteBasis basis(density.cutoff);
  const int d = basis.dim();
  const double miss = 1.0 - detector.eta_c;
  const double dark = std::exp(-detector.nu);

  // no_click[S] = Tr(rho prod_{j in S} Pi0_j), Pi0 diagonal: e^{-nu} (1 - eta_c)^n.
  std::array<double, 16> no_click{};
  for (int b = 0; b < d; ++b) {
    for (int a = 0; a < d; ++a) {
      const double p = density.rho(a + d * b, a + d * b);
      if (p == 0.0) continue;
      const std::array<int, 4> n{basis.n1(a), basis.n2(a), basis.n1(b), basis.n2(b)};
      std::array<double, 4> q{};
      for (int j = 0; j < 4; ++j) q[j] = dark * std::pow(miss, n[j]);
      for (int set = 0; set < 16; ++set) {
        double w = p;
        for (int j = 0; j < 4; ++j) {
          if (set & (1 << j)) w *= q[j];
        }
        no_click[set] += w;
      }
    }
  }

  // Inclusion-exclusion: P(exactly the detectors in C click).
  PatternProbs out{};
  for (int clicks = 0; clicks < 16; ++clicks) {
    const int silent = 15 & ~clicks;
    double acc = 0.0;
    for (int sub = clicks;; sub = (sub - 1) & clicks) {
      const int parity = __builtin_popcount(static_cast<unsigned>(sub)) & 1;
      acc += (parity ? -1.0 : 1.0) * no_click[silent | sub];
      if (sub == 0) break;
    }
    out[clicks] = acc;
  }
  return out;
}

JointProbs squash(const PatternProbs& patterns) {
  JointProbs j;
  for (int ia = 0; ia < 2; ++ia) {
    for (int ib = 0; ib < 2; ++ib) {
      const int single = (1 << ia) | (1 << (2 + ib));
      const int double_a = 0b0011 | (1 << (2 + ib));
      const int double_b = (1 << ia) | 0b1100;
      j.p[ia][ib] = patterns[single] + 0.5 * patterns[double_a] + 0.5 * patterns[double_b] + 0.25 * patterns[15];
    }
  }
  return j;
}

JointProbs single_clicks(const PatternProbs& patterns) {
  JointProbs j;
  for (int ia = 0; ia < 2; ++ia) {
    for (int ib = 0; ib < 2; ++ib) j.p[ia][ib] = patterns[(1 << ia) | (1 << (2 + ib))];
  }
  return j;
}

double coincidence_probability(const PatternProbs& patterns) {
  double acc = 0.0;
  for (int c = 0; c < 16; ++c) {
    if ((c & 0b0011) && (c & 0b1100)) acc += patterns[c];
  }
  return acc;
}

PatternProbs oracle_patterns(const SourceModel& source, double eta_a, double eta_b, double theta_a, double theta_b,
                             const DetectorParams& detector, int cutoff) {
  FockState4 state;
  if (const auto* pdc = std::get_if<PdcSource>(&source)) {
    state = build_pdc_state(pdc->xi, cutoff > 0 ? cutoff : pdc_cutoff_for(pdc->xi));
  } else {
    state = build_bell_state(cutoff > 0 ? cutoff : 1);
  }
  Density rho = to_density(state);
  rho = apply_loss(rho, eta_a, Mode::A1);
  rho = apply_loss(rho, eta_a, Mode::A2);
  rho = apply_loss(rho, eta_b, Mode::B1);
  rho = apply_loss(rho, eta_b, Mode::B2);
  rho = rotate_site(rho, theta_a, Site::A);
  rho = rotate_site(rho, theta_b, Site::B);
  return click_pattern_probs(rho, detector);
}

JointProbs oracle_joint_probs(const SourceModel& source, double eta_a, double eta_b, double theta_a, double theta_b,
                              const DetectorParams& detector, bool include_double_clicks, int cutoff) {
  const PatternProbs patterns = oracle_patterns(source, eta_a, eta_b, theta_a, theta_b, detector, cutoff);
  return include_double_clicks ? squash(patterns) : single_clicks(patterns);
}

}  // namespace bellturb
