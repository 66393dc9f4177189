#include "predlab/embedding.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace predlab {

DelaySeries::DelaySeries(std::span<const double> measurements, std::size_t k) {
  *this = from_segments({std::vector<double>(measurements.begin(), measurements.end())}, k);
}

DelaySeries DelaySeries::from_segments(const std::vector<std::vector<double>>& segments,
                                       std::size_t k) {
  if (k == 0) throw std::invalid_argument("delay series: k must be >= 1");
  if (segments.empty()) throw std::invalid_argument("delay series: no measurements");
  DelaySeries s;
  s.k_ = k;
  for (const auto& seg : segments) {
    if (seg.size() < k) {
      throw std::invalid_argument("delay series: " + std::to_string(seg.size()) +
                                  " measurements are fewer than k = " + std::to_string(k));
    }
    s.segment_starts_.push_back(s.size());
    const std::size_t count = seg.size() - k + 1;
    s.data_.reserve(s.data_.size() + count * k);
    for (std::size_t i = 0; i < count; ++i) {
      s.data_.insert(s.data_.end(), seg.begin() + static_cast<std::ptrdiff_t>(i),
                     seg.begin() + static_cast<std::ptrdiff_t>(i + k));
      s.is_last_.push_back(i + 1 == count ? 1 : 0);
    }
    s.source_len_ += seg.size();
  }
  return s;
}

DelaySeries DelaySeries::from_vectors(std::vector<double> flat, std::size_t k) {
  if (k == 0) throw std::invalid_argument("delay series: k must be >= 1");
  if (flat.empty() || flat.size() % k != 0) {
    throw std::invalid_argument("delay series: vector data must be a non-empty multiple of k");
  }
  DelaySeries s;
  s.k_ = k;
  s.data_ = std::move(flat);
  s.segment_starts_ = {0};
  s.is_last_.assign(s.size(), 0);
  s.is_last_.back() = 1;
  s.source_len_ = s.size() + k - 1;
  return s;
}

bool DelaySeries::has_successor(std::size_t i) const { return i < size() && is_last_[i] == 0; }

DelaySeries DelaySeries::translated(std::span<const double> c) const {
  if (c.size() != k_) throw std::invalid_argument("translated: shift has the wrong dimension");
  DelaySeries out = *this;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += c[i % k_];
  return out;
}

DelaySeries delay_series(std::span<const double> measurements, std::size_t k) {
  return DelaySeries(measurements, k);
}

namespace {

void check_observable(const Observable& h, const SystemConfig& cfg) {
  if (h.ambient_dim() != ambient_dim(cfg.id)) {
    throw std::invalid_argument("observable acts on R^" + std::to_string(h.ambient_dim()) +
                                " but " + std::string(to_string(cfg.id)) + " lives in R^" +
                                std::to_string(ambient_dim(cfg.id)));
  }
}

}  // namespace

std::vector<double> delay_map(const Observable& h, std::size_t k, const SystemConfig& cfg,
                              const State& x) {
  if (k == 0) throw std::invalid_argument("delay_map: k must be >= 1");
  return measure_orbit(h, cfg, x, k, 0);
}

std::vector<double> measure_orbit(const Observable& h, const SystemConfig& cfg, const State& x0,
                                  std::size_t n, std::size_t burn_in) {
  check_observable(h, cfg);
  if (n == 0) throw std::invalid_argument("measure_orbit: n must be >= 1");
  std::vector<double> out;
  out.reserve(n);
  std::visit(
      [&](const auto& s) {
        iterate_orbit(cfg, s, n, burn_in, [&](std::size_t, const auto& x) {
          out.push_back(h.evaluate(coordinates(x).view()));
        });
      },
      x0);
  return out;
}

std::vector<double> orbit_coordinates(const SystemConfig& cfg, const State& x0, std::size_t n,
                                      std::size_t burn_in) {
  if (n == 0) throw std::invalid_argument("orbit_coordinates: n must be >= 1");
  const std::size_t dim = ambient_dim(cfg.id);
  std::vector<double> out;
  out.reserve(n * dim);
  std::visit(
      [&](const auto& s) {
        iterate_orbit(cfg, s, n, burn_in, [&](std::size_t, const auto& x) {
          const auto c = coordinates(x);
          out.insert(out.end(), c.values.begin(), c.values.begin() + static_cast<std::ptrdiff_t>(dim));
        });
      },
      x0);
  return out;
}

std::vector<double> apply_observable(const Observable& h, std::span<const double> coords) {
  const std::size_t dim = h.ambient_dim();
  if (coords.size() % dim != 0) {
    throw std::invalid_argument("apply_observable: coordinate block is not a multiple of the dimension");
  }
  std::vector<double> out(coords.size() / dim);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h.evaluate(coords.subspan(i * dim, dim));
  return out;
}

void write_series_csv(std::ostream& out, const DelaySeries& series) {
  out << "i";
  for (std::size_t j = 0; j < series.k(); ++j) out << ",y" << j;
  out << "\n";
  char buf[40];
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << i;
    for (double v : series[i]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write_series_csv: stream failure");
}

}  // namespace predlab
