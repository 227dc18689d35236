#pragma once

// Independent reference computations. Nothing here calls into the library's
// numeric code; they are written the slow, obvious way.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tspo/matrix.hpp"
#include "tspo/random.hpp"

namespace oracle {

// Two-pass mean / population std in long double.
struct Moments {
  long double mean = 0;
  long double std_dev = 0;
};

inline Moments moments(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  const long double m = s / v.size();
  long double q = 0;
  for (double x : v) q += (x - m) * (x - m);
  return {m, std::sqrt(q / v.size())};
}

// Plain (v - mean) / (std + eps), no scale factor.
inline std::vector<double> normalize_plain(const std::vector<double>& v, double eps) {
  const Moments mo = moments(v);
  std::vector<double> out;
  for (double x : v) out.push_back(static_cast<double>((x - mo.mean) / (mo.std_dev + eps)));
  return out;
}

// Pearson chi-square written out term by term.
inline double chi2(double opp, double omp, double opm, double omm) {
  const double n = opp + omp + opm + omm;
  const double r_plus = opp + opm, r_minus = omp + omm;
  const double c_plus = opp + omp, c_minus = opm + omm;
  auto term = [](double o, double e) { return (o - e) * (o - e) / e; };
  return term(opp, r_plus * c_plus / n) + term(opm, r_plus * c_minus / n) +
         term(omp, r_minus * c_plus / n) + term(omm, r_minus * c_minus / n);
}

inline std::string lower_squash(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// Linear scan: 1-based position of the first feedback containing `needle`.
inline std::optional<std::size_t> first_hit(const std::vector<std::string>& feedbacks,
                                            const std::string& needle) {
  const std::string n = lower_squash(needle);
  for (std::size_t k = 0; k < feedbacks.size(); ++k) {
    if (lower_squash(feedbacks[k]).find(n) != std::string::npos) return k + 1;
  }
  return std::nullopt;
}

// Central differences of f with respect to every entry of w.
inline tspo::Matrix<double> finite_difference(const std::function<double(const tspo::Matrix<double>&)>& f,
                                              tspo::Matrix<double> w, double h = 1e-5) {
  tspo::Matrix<double> g(w.rows(), w.cols(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      const double keep = w(r, c);
      w(r, c) = keep + h;
      const double up = f(w);
      w(r, c) = keep - h;
      const double down = f(w);
      w(r, c) = keep;
      g(r, c) = (up - down) / (2 * h);
    }
  }
  return g;
}

inline double frobenius(const tspo::Matrix<double>& m) {
  double s = 0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) s += m(r, c) * m(r, c);
  return std::sqrt(s);
}

inline double relative_error(const tspo::Matrix<double>& a, const tspo::Matrix<double>& b) {
  double d = 0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) d += (a(r, c) - b(r, c)) * (a(r, c) - b(r, c));
  return std::sqrt(d) / std::max(frobenius(b), 1e-8);
}

// Box-Muller on the library's uniform helper.
inline double gaussian(tspo::Rng& rng) {
  const double u1 = 1.0 - tspo::uniform01(rng);
  const double u2 = tspo::uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline void fill_gaussian(tspo::Matrix<double>& m, tspo::Rng& rng, double scale) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = scale * gaussian(rng);
}

}  // namespace oracle
