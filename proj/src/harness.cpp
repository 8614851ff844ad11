#include "spherebispec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "spherebispec/detail/fileio.hpp"
#include "spherebispec/errors.hpp"
#include "spherebispec/wigner.hpp"

namespace spherebispec {

namespace {

std::uint64_t splitmix_next(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix_next(x);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : state_(seed) {}

RngStream RngStream::substream(std::uint64_t master, std::uint64_t cell,
                               std::uint64_t rep) {
  return RngStream(hash_combine(hash_combine(master, cell), rep));
}

std::uint64_t RngStream::next_u64() { return splitmix_next(state_); }

double RngStream::uniform() {
  const double u = double(next_u64() >> 11) * 0x1.0p-53;
  return u > 0.0 ? u : 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform(), u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

PowerSpectrum SpectrumModel::spectrum(int l_min, int L) const {
  if (amplitude <= 0.0) throw std::domain_error("SpectrumModel: amplitude > 0");
  if (l_min < 1) throw std::domain_error("SpectrumModel: l_min >= 1");
  PowerSpectrum C(l_min, L);
  for (int l = l_min; l <= L; ++l) {
    switch (kind) {
      case Kind::power_law:
        C.at(l) = amplitude * std::pow(double(l), -alpha);
        break;
      case Kind::sachs_wolfe_like:
        C.at(l) = amplitude / (double(l) * (l + 1.0));
        break;
    }
  }
  return C;
}

double variance_of_field(const SpectrumModel& model, int L) {
  const PowerSpectrum C = model.spectrum(1, L);
  double s = 0.0;
  for (int l = 1; l <= L; ++l) s += (2.0 * l + 1.0) * C.at(l);
  return s / (4.0 * std::numbers::pi);
}

SpectrumModel normalized_model(SpectrumModel::Kind kind, double alpha, int L,
                               double variance_target) {
  if (variance_target <= 0.0)
    throw std::domain_error("normalized_model: variance_target > 0");
  SpectrumModel m{kind, 1.0, alpha};
  m.amplitude = variance_target / variance_of_field(m, L);
  return m;
}

HarmonicCoefficients sample_gaussian_alm(const PowerSpectrum& C, int L,
                                         RngStream& stream) {
  if (L > C.L) throw std::out_of_range("sample_gaussian_alm: L beyond spectrum");
  HarmonicCoefficients alm(C.l_min, L);
  for (int l = C.l_min; l <= L; ++l) {
    const double cl = C.at(l);
    if (cl <= 0.0) throw std::domain_error("sample_gaussian_alm: need C_l > 0");
    alm.at(l, 0) = {std::sqrt(cl) * stream.normal(), 0.0};
    const double half = std::sqrt(cl / 2.0);
    for (int m = 1; m <= l; ++m)
      alm.at(l, m) = {half * stream.normal(), half * stream.normal()};
  }
  return alm;
}

HarmonicCoefficients make_nongaussian_alm(const HarmonicCoefficients& alm,
                                          const NonGaussianConfig& cfg,
                                          int L_out) {
  if (L_out > alm.L)
    throw std::invalid_argument("make_nongaussian_alm: L_out beyond input band");
  if (cfg.f_nl == 0.0) {
    if (L_out == alm.L) return alm;
    HarmonicCoefficients out(alm.l_min, L_out);
    for (int l = alm.l_min; l <= L_out; ++l)
      for (int m = 0; m <= l; ++m) out.at(l, m) = alm.at(l, m);
    return out;
  }
  if (cfg.oversample < 2)
    throw guard_error("make_nongaussian_alm: oversample >= 2 needed for the quadratic term");
  const GridSpec spec{alm.L, cfg.oversample};
  SphereGrid g = synthesize(alm, spec);
  double et2;
  if (cfg.use_ensemble_mean) {
    et2 = cfg.ensemble_et2;
  } else {
    double s = 0.0;
    for (int i = 0; i < g.n_theta; ++i) {
      double row = 0.0;
      for (int j = 0; j < g.n_phi; ++j) row += g.at(i, j) * g.at(i, j);
      s += g.theta_weights[i] * row;
    }
    et2 = s * (2.0 * std::numbers::pi / g.n_phi) / (4.0 * std::numbers::pi);
  }
  for (double& v : g.values) v = v + cfg.f_nl * (v * v - et2);
  return analyze(g, L_out, alm.l_min);
}

double sachs_wolfe_bispectrum(int l1, int l2, int l3, const PowerSpectrum& C,
                              double f_nl, double G) {
  if (!triangle_ok(l1, l2, l3))
    throw std::invalid_argument("sachs_wolfe_bispectrum: triangle violation");
  if ((l1 + l2 + l3) & 1)
    throw std::invalid_argument("sachs_wolfe_bispectrum: odd l1+l2+l3");
  const double h = std::sqrt((2.0 * l1 + 1.0) * (2.0 * l2 + 1.0) *
                             (2.0 * l3 + 1.0) / (4.0 * std::numbers::pi));
  const double c1 = C.at(l1), c2 = C.at(l2), c3 = C.at(l3);
  return G * f_nl * h * wigner_3j_zero(l1, l2, l3) *
         (c1 * c2 + c2 * c3 + c1 * c3);
}

double asymptotic_critical_value(double level) {
  if (level <= 0.0 || level >= 1.0)
    throw std::domain_error("asymptotic_critical_value: level in (0,1)");
  double lo = 0.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (p_value_sup(mid) > level) lo = mid;
    else hi = mid;
    if (hi - lo < 1e-14) break;
  }
  return 0.5 * (lo + hi);
}

int worker_count() {
  if (const char* e = std::getenv("SPHEREBISPEC_THREADS")) {
    const int v = std::atoi(e);
    if (v >= 1) return v;
  }
  const unsigned h = std::thread::hardware_concurrency();
  return h ? int(h) : 1;
}

namespace {

void parallel_for(int n, const std::function<void(int)>& body) {
  const int W = std::min(worker_count(), n > 0 ? n : 1);
  if (W <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  pool.reserve(W);
  for (int t = 0; t < W; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& t : out) {
    const auto a = t.find_first_not_of(" \t");
    const auto b = t.find_last_not_of(" \t");
    t = (a == std::string::npos) ? "" : t.substr(a, b - a + 1);
  }
  out.erase(std::remove(out.begin(), out.end(), std::string()), out.end());
  return out;
}

double ordered_quantile(std::vector<double> v, double q) {
  // Weibull plotting position: E[U_(k:n)] = k/(n+1), so interpolating at
  // h = q(n+1) is unbiased on the probability scale; the plain k = ceil(qn)
  // order statistic sits visibly low in a thin upper tail
  std::sort(v.begin(), v.end());
  const int n = static_cast<int>(v.size());
  const double h = q * (n + 1);
  const int k = std::clamp(static_cast<int>(std::floor(h)), 1, n - 1);
  const double w = std::clamp(h - k, 0.0, 1.0);
  return v[k - 1] + w * (v[k] - v[k - 1]);
}

}  // namespace

StudyManifest StudyManifest::parse(const std::string& text) {
  StudyManifest m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (key == "statistics") {
      m.statistics.clear();
      for (const auto& t : split_list(val)) m.statistics.push_back(statistic_from_string(t));
    } else if (key == "L") {
      m.Ls.clear();
      for (const auto& t : split_list(val)) m.Ls.push_back(std::stoi(t));
    } else if (key == "K") {
      m.Ks.clear();
      for (const auto& t : split_list(val)) m.Ks.push_back(std::stoi(t));
    } else if (key == "l0") {
      m.l0 = std::stoi(val);
    } else if (key == "f_nl") {
      m.f_nls.clear();
      for (const auto& t : split_list(val)) m.f_nls.push_back(std::stod(t));
    } else if (key == "R") {
      m.R = std::stoi(val);
    } else if (key == "seed") {
      m.seed = std::stoull(val);
      m.seed_set = true;
    } else if (key == "levels") {
      m.levels.clear();
      for (const auto& t : split_list(val)) m.levels.push_back(std::stod(t));
    } else if (key == "spectrum") {
      if (val == "power_law") m.kind = SpectrumModel::Kind::power_law;
      else if (val == "sachs_wolfe_like" || val == "sw")
        m.kind = SpectrumModel::Kind::sachs_wolfe_like;
      else throw std::invalid_argument("manifest: unknown spectrum '" + val + "'");
    } else if (key == "alpha") {
      m.alpha = std::stod(val);
    } else if (key == "variance_target") {
      m.variance_target = std::stod(val);
    } else if (key == "l_min") {
      m.l_min = std::stoi(val);
    } else if (key == "G") {
      m.G = std::stod(val);
    } else {
      throw std::invalid_argument("manifest: unknown key '" + key + "'");
    }
  }
  return m;
}

StudyManifest StudyManifest::parse_file(const std::string& path) {
  return parse(detail::read_file(path));
}

void StudyManifest::validate() const {
  if (R < 1) throw std::invalid_argument("manifest: R >= 1");
  if (!seed_set) throw std::invalid_argument("manifest: seed is required");
  if (statistics.empty() || Ls.empty() || Ks.empty() || f_nls.empty() || levels.empty())
    throw std::invalid_argument("manifest: empty list");
  for (double a : levels)
    if (a <= 0.0 || a >= 1.0) throw std::invalid_argument("manifest: level in (0,1)");
  if (l_min < 1) throw std::invalid_argument("manifest: l_min >= 1");
}

StudyReport run_study(const StudyManifest& m) {
  m.validate();
  StudyReport report;
  report.manifest = m;

  struct Cfg {
    TestConfig tc;
  };
  for (std::size_t iL = 0; iL < m.Ls.size(); ++iL) {
    const int L = m.Ls[iL];
    const SpectrumModel model =
        normalized_model(m.kind, m.alpha, L, m.variance_target);
    const PowerSpectrum C = model.spectrum(m.l_min, L);

    std::vector<TestConfig> cfgs;
    for (Statistic s : m.statistics)
      for (int K : m.Ks) cfgs.push_back(TestConfig{s, L, m.l0, K});
    std::set<Ordinate> ord_set;
    for (const auto& tc : cfgs)
      for (const auto& o : required_ordinates(tc)) ord_set.insert(o);
    const std::vector<Ordinate> ords(ord_set.begin(), ord_set.end());

    // one frozen row cache per band limit, shared read-only by all workers
    WignerRowCache cache;
    for (const Ordinate& o : ords) cache.warm_up(o[0], o[1], o[2]);
    cache.freeze();

    for (std::size_t ifnl = 0; ifnl < m.f_nls.size(); ++ifnl) {
      const double fnl = m.f_nls[ifnl];
      const std::uint64_t cell = iL * m.f_nls.size() + ifnl;
      std::vector<std::vector<double>> sups(m.R,
                                            std::vector<double>(cfgs.size()));
      parallel_for(m.R, [&](int rep) {
        RngStream stream = RngStream::substream(m.seed, cell, rep);
        HarmonicCoefficients alm = sample_gaussian_alm(C, L, stream);
        if (fnl != 0.0) {
          NonGaussianConfig ng;
          ng.f_nl = fnl;
          ng.variance_target = m.variance_target;
          alm = make_nongaussian_alm(alm, ng, L);
        }
        std::map<Ordinate, double> ihat;
        for (const Ordinate& o : ords)
          ihat[o] = normalized_bispectrum_hat(alm, o[0], o[1], o[2], cache);
        for (std::size_t ic = 0; ic < cfgs.size(); ++ic)
          sups[rep][ic] = j_process(cfgs[ic], ihat).sup;
      });
      for (std::size_t ic = 0; ic < cfgs.size(); ++ic) {
        StudyReport::SupSeries ser;
        ser.statistic = cfgs[ic].statistic;
        ser.L = L;
        ser.K = cfgs[ic].K;
        ser.f_nl = fnl;
        ser.sups.resize(m.R);
        for (int r = 0; r < m.R; ++r) ser.sups[r] = sups[r][ic];
        report.series.push_back(std::move(ser));
      }
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& ser : report.series) {
    const StudyReport::SupSeries* base = nullptr;
    for (const auto& other : report.series)
      if (other.f_nl == 0.0 && other.statistic == ser.statistic &&
          other.L == ser.L && other.K == ser.K)
        base = &other;
    for (double level : m.levels) {
      StudyCell cell;
      cell.statistic = ser.statistic;
      cell.L = ser.L;
      cell.K = ser.K;
      cell.f_nl = ser.f_nl;
      cell.level = level;
      cell.asym_crit = asymptotic_critical_value(level);
      int nrej = 0;
      for (double s : ser.sups)
        if (s > cell.asym_crit) ++nrej;
      cell.asym_rate = double(nrej) / ser.sups.size();
      cell.se = std::sqrt(std::max(cell.asym_rate * (1.0 - cell.asym_rate), 0.0) /
                          ser.sups.size());
      cell.emp_crit = (ser.f_nl == 0.0) ? ordered_quantile(ser.sups, 1.0 - level)
                                        : nan;
      if (base) {
        const double crit = ordered_quantile(base->sups, 1.0 - level);
        int ntab = 0;
        for (double s : ser.sups)
          if (s > crit) ++ntab;
        cell.tab_rate = double(ntab) / ser.sups.size();
      } else {
        cell.tab_rate = nan;
      }
      report.cells.push_back(cell);
    }
  }
  return report;
}

StudyReport run_size_study(const StudyManifest& m) {
  if (std::find(m.f_nls.begin(), m.f_nls.end(), 0.0) == m.f_nls.end())
    throw std::invalid_argument("run_size_study: f_nl list must contain 0");
  return run_study(m);
}

StudyReport run_power_study(const StudyManifest& m) {
  bool nonzero = false;
  for (double f : m.f_nls) nonzero = nonzero || f != 0.0;
  if (!nonzero)
    throw std::invalid_argument("run_power_study: need a nonzero f_nl");
  StudyManifest mm = m;
  // the f_nl = 0 cells calibrate the tabulated thresholds
  if (std::find(mm.f_nls.begin(), mm.f_nls.end(), 0.0) == mm.f_nls.end())
    mm.f_nls.insert(mm.f_nls.begin(), 0.0);
  return run_study(mm);
}

void write_report_csv(const std::string& path, const StudyReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "statistic,L,K,f_nl,level,asym_crit,asym_reject_rate,emp_crit,"
         "tab_reject_rate,binom_se\n";
  for (const auto& c : r.cells)
    out << to_string(c.statistic) << ',' << c.L << ',' << c.K << ',' << c.f_nl
        << ',' << c.level << ',' << c.asym_crit << ',' << c.asym_rate << ','
        << c.emp_crit << ',' << c.tab_rate << ',' << c.se << '\n';
  detail::write_file_atomic(path, out.str());
}

void write_report_json(const std::string& path, const StudyReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"seed\":" << r.manifest.seed << ",\"R\":" << r.manifest.R
      << ",\"l0\":" << r.manifest.l0 << ",\"variance_target\":"
      << r.manifest.variance_target << ",\"cells\":[";
  bool first = true;
  for (const auto& c : r.cells) {
    if (!first) out << ',';
    first = false;
    out << "{\"statistic\":\"" << to_string(c.statistic) << "\",\"L\":" << c.L
        << ",\"K\":" << c.K << ",\"f_nl\":" << c.f_nl << ",\"level\":"
        << c.level << ",\"asym_crit\":" << c.asym_crit
        << ",\"asym_reject_rate\":" << c.asym_rate << ",\"emp_crit\":";
    if (std::isnan(c.emp_crit)) out << "null";
    else out << c.emp_crit;
    out << ",\"tab_reject_rate\":";
    if (std::isnan(c.tab_rate)) out << "null";
    else out << c.tab_rate;
    out << ",\"binom_se\":" << c.se << '}';
  }
  out << "]}";
  detail::write_file_atomic(path, out.str());
}

}  // namespace spherebispec
