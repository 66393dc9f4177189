#include "predlab/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace predlab {

int total_degree(const MultiIndex& e) {
  int d = 0;
  for (int x : e) d += x;
  return d;
}

namespace {

// Exponent vectors of exactly `degree` over `dim` variables, lexicographically
// descending.
void exact_degree(std::size_t dim, int degree, std::size_t pos, MultiIndex& cur,
                  std::vector<MultiIndex>& out) {
  if (pos + 1 == dim) {
    cur[pos] = degree;
    out.push_back(cur);
    cur[pos] = 0;
    return;
  }
  for (int e = degree; e >= 0; --e) {
    cur[pos] = e;
    exact_degree(dim, degree - e, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<MultiIndex> monomial_basis(std::size_t ambient_dim, int degree) {
  if (ambient_dim == 0) throw std::invalid_argument("monomial_basis: ambient_dim must be >= 1");
  if (degree < 0) throw std::invalid_argument("monomial_basis: degree must be >= 0");
  std::vector<MultiIndex> out;
  MultiIndex cur(ambient_dim, 0);
  for (int d = 0; d <= degree; ++d) exact_degree(ambient_dim, d, 0, cur, out);
  return out;
}

double monomial_value(const MultiIndex& e, std::span<const double> x) {
  if (e.size() != x.size()) throw std::invalid_argument("monomial_value: dimension mismatch");
  double v = 1.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    for (int p = 0; p < e[j]; ++p) v *= x[j];
  }
  return v;
}

double BaseFunction::evaluate(std::span<const double> x) const {
  switch (kind) {
    case BaseKind::zero:
      return 0.0;
    case BaseKind::coordinate:
      return x[index];
    case BaseKind::cosine_fiber:
      return x[3];
    case BaseKind::sine_fiber:
      return x[4];
  }
  return 0.0;
}

std::string BaseFunction::name() const {
  switch (kind) {
    case BaseKind::zero:
      return "zero";
    case BaseKind::coordinate:
      return "x" + std::to_string(index + 1);
    case BaseKind::cosine_fiber:
      return "cosine_fiber";
    case BaseKind::sine_fiber:
      return "sine_fiber";
  }
  return "zero";
}

BaseFunction BaseFunction::parse(std::string_view name) {
  if (name == "zero") return {BaseKind::zero, 0};
  if (name == "cosine_fiber") return {BaseKind::cosine_fiber, 0};
  if (name == "sine_fiber") return {BaseKind::sine_fiber, 0};
  if (name.size() >= 2 && name[0] == 'x') {
    std::size_t idx = 0;
    for (char c : name.substr(1)) {
      if (c < '0' || c > '9') throw std::invalid_argument("unknown base function: " + std::string(name));
      idx = idx * 10 + static_cast<std::size_t>(c - '0');
    }
    if (idx == 0) throw std::invalid_argument("coordinate bases are 1-based: " + std::string(name));
    return {BaseKind::coordinate, idx - 1};
  }
  throw std::invalid_argument("unknown base function: " + std::string(name));
}

Observable::Observable(BaseFunction base, std::size_t ambient_dim, int degree_bound)
    : base_(base), dim_(ambient_dim), degree_(degree_bound) {
  if (ambient_dim == 0) throw std::invalid_argument("Observable: ambient_dim must be >= 1");
  if (degree_bound < 0) throw std::invalid_argument("Observable: degree bound must be >= 0");
  if (base.kind == BaseKind::coordinate && base.index >= ambient_dim) {
    throw std::invalid_argument("Observable: coordinate base outside the ambient dimension");
  }
  if ((base.kind == BaseKind::cosine_fiber || base.kind == BaseKind::sine_fiber) &&
      ambient_dim != kAmbientDim) {
    throw std::invalid_argument("Observable: fiber bases need the 5-dimensional ambient space");
  }
}

Observable Observable::constant(double value, std::size_t ambient_dim) {
  Observable h(BaseFunction{}, ambient_dim, 0);
  h.set_coefficient(MultiIndex(ambient_dim, 0), value);
  return h;
}

void Observable::set_coefficient(const MultiIndex& e, double c) {
  if (e.size() != dim_) throw std::invalid_argument("set_coefficient: wrong index length");
  if (std::any_of(e.begin(), e.end(), [](int x) { return x < 0; })) {
    throw std::invalid_argument("set_coefficient: negative exponent");
  }
  if (total_degree(e) > degree_) throw std::invalid_argument("set_coefficient: degree above bound");
  if (!std::isfinite(c)) throw std::invalid_argument("set_coefficient: non-finite coefficient");
  if (c == 0.0) {
    coeffs_.erase(e);
  } else {
    coeffs_[e] = c;
  }
  rebuild_terms();
}

double Observable::coefficient(const MultiIndex& e) const {
  auto it = coeffs_.find(e);
  return it == coeffs_.end() ? 0.0 : it->second;
}

void Observable::rebuild_terms() {
  exponents_.clear();
  terms_.clear();
  for (const auto& [e, c] : coeffs_) {
    terms_.push_back({exponents_.size(), c});
    exponents_.insert(exponents_.end(), e.begin(), e.end());
  }
}

double Observable::evaluate(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("Observable::evaluate: dimension mismatch");
  double v = base_.evaluate(x);
  for (const Term& t : terms_) {
    double m = t.coeff;
    const int* e = exponents_.data() + t.offset;
    for (std::size_t j = 0; j < dim_; ++j) {
      for (int p = 0; p < e[j]; ++p) m *= x[j];
    }
    v += m;
  }
  return v;
}

double Observable::coefficient_norm() const {
  double s = base_.kind == BaseKind::zero ? 0.0 : 1.0;
  for (const auto& [e, c] : coeffs_) s += c * c;
  return std::sqrt(s);
}

std::string Observable::serialize() const {
  std::ostringstream out;
  out << "observable\n";
  out << "base " << base_.name() << "\n";
  out << "ambient_dim " << dim_ << "\n";
  out << "degree " << degree_ << "\n";
  for (const auto& [e, c] : coeffs_) {
    out << "term";
    for (int x : e) out << ' ' << x;
    out << ' ' << format_real(c) << "\n";
  }
  out << "end\n";
  return out.str();
}

Observable Observable::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto fail = [](const std::string& msg) -> void {
    throw std::invalid_argument("Observable::parse: " + msg);
  };
  if (!std::getline(in, line) || line != "observable") fail("missing header");
  std::string key;
  std::string base_name;
  std::size_t dim = 0;
  int degree = -1;
  {
    std::getline(in, line);
    std::istringstream ls(line);
    if (!(ls >> key >> base_name) || key != "base") fail("expected 'base <name>'");
  }
  {
    std::getline(in, line);
    std::istringstream ls(line);
    if (!(ls >> key >> dim) || key != "ambient_dim") fail("expected 'ambient_dim <n>'");
  }
  {
    std::getline(in, line);
    std::istringstream ls(line);
    if (!(ls >> key >> degree) || key != "degree") fail("expected 'degree <n>'");
  }
  Observable h(BaseFunction::parse(base_name), dim, degree);
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    if (!(ls >> key) || key != "term") fail("expected 'term' or 'end'");
    MultiIndex e(dim);
    for (auto& x : e) {
      if (!(ls >> x)) fail("short exponent list");
    }
    std::string coeff_text;
    if (!(ls >> coeff_text)) fail("missing coefficient");
    h.set_coefficient(e, std::stod(coeff_text));
  }
  if (!ended) fail("missing 'end'");
  return h;
}

Observable perturb(const Observable& h, std::span<const double> amplitudes) {
  const auto basis = monomial_basis(h.ambient_dim(), h.degree_bound());
  if (amplitudes.size() != basis.size()) {
    throw std::invalid_argument("perturb: expected " + std::to_string(basis.size()) +
                                " amplitudes, got " + std::to_string(amplitudes.size()));
  }
  Observable out = h;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (amplitudes[j] != 0.0) {
      out.set_coefficient(basis[j], out.coefficient(basis[j]) + amplitudes[j]);
    }
  }
  return out;
}

Observable perturb(const Observable& h, double scale, CounterRng& rng) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("perturb: scale must be finite and >= 0");
  }
  const std::size_t m = monomial_basis(h.ambient_dim(), h.degree_bound()).size();
  std::vector<double> amps(m);
  for (auto& a : amps) a = rng.uniform(-scale, scale);
  return perturb(h, amps);
}

Observable perturb(const Observable& h, double scale, std::uint64_t seed) {
  CounterRng rng(seed, "observable-perturbation");
  return perturb(h, scale, rng);
}

double default_amplitude_scale(const Observable& h) {
  return 0.1 * std::max(1.0, h.coefficient_norm());
}

LipschitzSample sample_lipschitz(const Observable& h, std::span<const double> points,
                                 std::size_t n_pairs, CounterRng& rng) {
  const std::size_t dim = h.ambient_dim();
  if (points.size() % dim != 0 || points.size() < 2 * dim) {
    throw std::invalid_argument("sample_lipschitz: need at least two points of the ambient dimension");
  }
  const std::size_t n = points.size() / dim;
  LipschitzSample out;
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const std::size_t i = rng.below(n);
    const std::size_t j = rng.below(n);
    const auto x = points.subspan(i * dim, dim);
    const auto y = points.subspan(j * dim, dim);
    double d2 = 0.0;
    for (std::size_t c = 0; c < dim; ++c) d2 += (x[c] - y[c]) * (x[c] - y[c]);
    const double hx = h.evaluate(x);
    out.sup_norm = std::max(out.sup_norm, std::fabs(hx));
    if (d2 == 0.0) continue;
    out.max_quotient = std::max(out.max_quotient, std::fabs(hx - h.evaluate(y)) / std::sqrt(d2));
    ++out.pairs;
  }
  return out;
}

}  // namespace predlab
