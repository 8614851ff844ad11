#include "spherebispec/jtests.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "spherebispec/detail/fileio.hpp"
#include "spherebispec/spectra.hpp"

namespace spherebispec {

Statistic statistic_from_string(const std::string& s) {
  if (s == "J1") return Statistic::J1;
  if (s == "J2") return Statistic::J2;
  if (s == "J3") return Statistic::J3;
  if (s == "J4") return Statistic::J4;
  throw std::invalid_argument("unknown statistic: " + s);
}

std::string to_string(Statistic s) {
  switch (s) {
    case Statistic::J1: return "J1";
    case Statistic::J2: return "J2";
    case Statistic::J3: return "J3";
    default: return "J4";
  }
}

void TestConfig::validate() const {
  if (l0 < 2) throw std::invalid_argument("TestConfig: l0 >= 2");
  if (K < 0) throw std::invalid_argument("TestConfig: K >= 0");
  const bool diag = statistic == Statistic::J1 || statistic == Statistic::J2;
  if (diag ? (l0 + K > L) : (l0 + K + 1 > L))
    throw std::invalid_argument("TestConfig: band limit too small for (l0, K)");
}

namespace {

struct Term {
  int l;                        // jump multipole (middle index)
  std::vector<Ordinate> triples;  // pooled triples contributing at this l
};

// The per-l pooled groups. For J1/J2 the pooled triple (l-u, l, l+u) needs
// l+u <= L to be observable and l >= 2u for the triangle rule; offending
// terms are dropped, not zero-filled.
std::vector<Term> term_layout(const TestConfig& cfg) {
  cfg.validate();
  std::vector<Term> terms;
  const bool diag = cfg.statistic == Statistic::J1 || cfg.statistic == Statistic::J2;
  if (diag) {
    for (int l = cfg.l0 + cfg.K; l <= cfg.L - cfg.K; ++l) {
      if (l & 1) continue;
      Term t{l, {}};
      for (int u = 0; u <= cfg.K; ++u) {
        if (l < 2 * u || l - u < 1) continue;
        t.triples.push_back({l - u, l, l + u});
      }
      if (!t.triples.empty()) terms.push_back(std::move(t));
    }
  } else {
    for (int l = cfg.l0 + cfg.K + 1; l <= cfg.L - cfg.l0 - cfg.K; ++l) {
      Term t{l, {}};
      for (int u = 0; u <= cfg.K; ++u)
        t.triples.push_back({cfg.l0 + u, l, l + cfg.l0 + u});
      terms.push_back(std::move(t));
    }
  }
  return terms;
}

}  // namespace

std::vector<Ordinate> required_ordinates(const TestConfig& cfg) {
  std::vector<Ordinate> out;
  for (const Term& t : term_layout(cfg))
    out.insert(out.end(), t.triples.begin(), t.triples.end());
  return out;
}

TestProcessPath j_process(const TestConfig& cfg,
                          const std::map<Ordinate, double>& ihat) {
  const auto terms = term_layout(cfg);
  const bool diag = cfg.statistic == Statistic::J1 || cfg.statistic == Statistic::J2;
  const double outer = 1.0 / std::sqrt(diag ? cfg.L / 2.0 : double(cfg.L));
  const double pool = 1.0 / std::sqrt(cfg.K + 1.0);

  TestProcessPath path;
  path.r_grid.push_back(0.0);
  path.values.push_back(0.0);
  double sum = 0.0;
  for (const Term& t : terms) {
    double inner = 0.0;
    for (const Ordinate& o : t.triples) {
      const auto it = ihat.find(o);
      if (it == ihat.end()) {
        std::ostringstream msg;
        msg << "j_process: missing ordinate (" << o[0] << ',' << o[1] << ','
            << o[2] << ')';
        throw std::invalid_argument(msg.str());
      }
      const double v = it->second;
      switch (cfg.statistic) {
        case Statistic::J1: {
          const double d = delta_factor(o[0], o[1], o[2]);
          inner += v / std::sqrt(d);
          break;
        }
        case Statistic::J2: {
          const double d = delta_factor(o[0], o[1], o[2]);
          inner += (v * v - d) / (std::sqrt(2.0) * d);
          break;
        }
        case Statistic::J3:
          inner += v;
          break;
        case Statistic::J4:
          inner += (v * v - 1.0) / std::sqrt(2.0);
          break;
      }
    }
    sum += outer * pool * inner;
    path.r_grid.push_back(double(t.l) / cfg.L);
    path.values.push_back(sum);
  }
  if (path.r_grid.back() < 1.0) {
    path.r_grid.push_back(1.0);
    path.values.push_back(sum);
  }
  path.sup = sup_statistic(path);
  path.p_value = p_value_sup(path.sup);
  return path;
}

double sup_statistic(const TestProcessPath& path) {
  double s = 0.0;  // the path starts at 0, so the sup is never negative
  for (double v : path.values) s = std::max(s, v);
  return s;
}

double p_value_sup(double x) {
  if (x < 0.0) throw std::domain_error("p_value_sup: x >= 0");
  return std::erfc(x / std::sqrt(2.0));
}

void write_path_csv(const std::string& path, const TestProcessPath& p) {
  std::ostringstream out;
  out.precision(17);
  out << "r,value\n";
  for (std::size_t i = 0; i < p.r_grid.size(); ++i)
    out << p.r_grid[i] << ',' << p.values[i] << '\n';
  detail::write_file_atomic(path, out.str());
}

std::string result_json(const TestConfig& cfg, const TestProcessPath& p) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"statistic\":\"" << to_string(cfg.statistic) << "\",\"L\":" << cfg.L
      << ",\"l0\":" << cfg.l0 << ",\"K\":" << cfg.K << ",\"sup\":" << p.sup
      << ",\"p_value\":" << p.p_value << "}";
  return out.str();
}

}  // namespace spherebispec
