#include "comet/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace comet {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kFitFormat = "comet-fit";
constexpr int kFitVersion = 1;

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

json parse_json(std::istream& in, const std::string& what) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("cannot parse " + what + ": " + e.what());
  }
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(where + ": missing required key '" + key + "'");
  }
  return j.at(key);
}

template <class T>
T get_as(const json& j, const char* key, const std::string& where) {
  try {
    return require(j, key, where).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(where + ": key '" + key + "' has the wrong type");
  }
}

std::vector<double> get_numbers(const json& j, const char* key, std::size_t expected,
                                const std::string& where) {
  const auto& a = require(j, key, where);
  if (!a.is_array() || a.size() != expected) {
    throw ValidationError(where + ": '" + key + "' must be an array of length " + std::to_string(expected));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : a) {
    if (!v.is_number()) throw ValidationError(where + ": '" + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Dims get_dims(const json& j, const char* key, const std::string& where) {
  const auto d = get_as<std::vector<long long>>(j, key, where);
  Dims out;
  for (auto v : d) {
    if (v < 1) throw ValidationError(where + ": '" + key + "' entries must be positive");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json mat_json(const Eigen::MatrixXd& m) {
  return json(std::vector<double>(m.data(), m.data() + m.size()));
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  std::memcpy(buf, &bits, 8);
  out.write(buf, 8);
}

double get_f64(std::istream& in, const std::string& path) {
  char buf[8];
  if (!in.read(buf, 8)) throw IoError("sidecar '" + path + "' is shorter than the header declares");
  std::uint64_t bits;
  std::memcpy(&bits, buf, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << v;
  return s.str();
}

std::uint64_t parse_hex64(const std::string& s, const std::string& where) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ValidationError(where + ": bad fingerprint");
  return v;
}

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json stat_json(const SummaryStat& s) {
  return {{"median", number_or_null(s.median)}, {"quartile_deviation", number_or_null(s.quartile_deviation)}};
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Dataset -----------------------------------------------------------------

ClusteredDataset read_dataset(const std::string& path, bool require_response) {
  auto in = open_in(path);
  const json doc = parse_json(in, "dataset '" + path + "'");
  const std::string where = "dataset '" + path + "'";

  ClusteredDataset ds;
  ds.p = get_dims(doc, "p", where);
  ds.q = get_dims(doc, "q", where);
  const auto D = get_as<std::size_t>(doc, "D", where);
  if (D != ds.p.size() || D != ds.q.size()) throw ValidationError(where + ": D disagrees with p/q");
  const auto n = get_as<std::size_t>(doc, "n", where);
  const auto m = get_as<std::vector<std::size_t>>(doc, "m", where);
  if (m.size() != n) throw ValidationError(where + ": 'm' must have n entries");
  const std::string enc = doc.contains("encoding") ? get_as<std::string>(doc, "encoding", where) : "json";
  const auto pstar = product(ds.p);
  const auto qstar = product(ds.q);

  auto make_subject = [&](std::size_t mi, const std::vector<double>& y, const std::vector<double>& x,
                          const std::vector<double>& z) {
    Subject s;
    for (std::size_t j = 0; j < mi; ++j) {
      Observation o;
      o.y = y.empty() ? 0.0 : y[j];
      o.x = DenseTensor(ds.p, std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(j * pstar),
                                                  x.begin() + static_cast<std::ptrdiff_t>((j + 1) * pstar)));
      o.z = DenseTensor(ds.q, std::vector<double>(z.begin() + static_cast<std::ptrdiff_t>(j * qstar),
                                                  z.begin() + static_cast<std::ptrdiff_t>((j + 1) * qstar)));
      s.obs.push_back(std::move(o));
    }
    return s;
  };

  if (enc == "json") {
    const auto& subjects = require(doc, "subjects", where);
    if (!subjects.is_array() || subjects.size() != n) throw ValidationError(where + ": 'subjects' must have n entries");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string w = where + " subject " + std::to_string(i + 1);
      const auto& sj = subjects[i];
      std::vector<double> y;
      if (require_response || (sj.is_object() && sj.contains("y"))) y = get_numbers(sj, "y", m[i], w);
      ds.subjects.push_back(make_subject(m[i], y, get_numbers(sj, "X", m[i] * pstar, w),
                                         get_numbers(sj, "Z", m[i] * qstar, w)));
    }
  } else if (enc == "f64le") {
    const auto side = get_as<std::string>(doc, "sidecar", where);
    const auto side_path = (fs::path(path).parent_path() / side).string();
    auto bin = open_in(side_path, std::ios::in | std::ios::binary);
    for (std::size_t i = 0; i < n; ++i) {
      auto read_n = [&](std::size_t count) {
        std::vector<double> v(count);
        for (auto& x : v) x = get_f64(bin, side_path);
        return v;
      };
      auto y = read_n(m[i]);
      auto x = read_n(m[i] * pstar);
      auto z = read_n(m[i] * qstar);
      ds.subjects.push_back(make_subject(m[i], y, x, z));
    }
    if (bin.peek() != std::char_traits<char>::eof()) throw IoError("sidecar '" + side_path + "' has trailing bytes");
  } else {
    throw ValidationError(where + ": unknown encoding '" + enc + "'");
  }
  return ds;
}

void write_dataset(const std::string& path, const ClusteredDataset& ds, Encoding encoding) {
  json doc;
  doc["D"] = ds.order();
  doc["p"] = ds.p;
  doc["q"] = ds.q;
  doc["n"] = ds.num_subjects();
  std::vector<std::size_t> m;
  for (const auto& s : ds.subjects) m.push_back(s.obs.size());
  doc["m"] = m;
  if (encoding == Encoding::Json) {
    doc["encoding"] = "json";
    json subjects = json::array();
    for (const auto& s : ds.subjects) {
      std::vector<double> y, x, z;
      for (const auto& o : s.obs) {
        y.push_back(o.y);
        x.insert(x.end(), o.x.data().begin(), o.x.data().end());
        z.insert(z.end(), o.z.data().begin(), o.z.data().end());
      }
      subjects.push_back({{"y", y}, {"X", x}, {"Z", z}});
    }
    doc["subjects"] = std::move(subjects);
  } else {
    const auto side = fs::path(path).filename().string() + ".f64";
    doc["encoding"] = "f64le";
    doc["sidecar"] = side;
    auto bin = open_out((fs::path(path).parent_path() / side).string(), std::ios::out | std::ios::binary);
    for (const auto& s : ds.subjects) {
      for (const auto& o : s.obs) put_f64(bin, o.y);
      for (const auto& o : s.obs)
        for (double v : o.x.data()) put_f64(bin, v);
      for (const auto& o : s.obs)
        for (double v : o.z.data()) put_f64(bin, v);
    }
    if (!bin) throw IoError("failed writing sidecar for '" + path + "'");
  }
  auto out = open_out(path);
  out << doc.dump() << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

// Truth -------------------------------------------------------------------

void write_truth(const std::string& path, const Truth& truth) {
  json doc;
  doc["p"] = truth.B.dims();
  doc["B"] = std::vector<double>(truth.B.data().begin(), truth.B.data().end());
  doc["rho"] = truth.rho;
  doc["tau2"] = truth.tau2;
  doc["rank"] = truth.cp.rank();
  json factors = json::array();
  for (const auto& f : truth.cp.factors) factors.push_back(mat_json(f));
  doc["factors"] = std::move(factors);
  auto out = open_out(path);
  out << doc.dump() << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

Truth read_truth(const std::string& path) {
  auto in = open_in(path);
  const json doc = parse_json(in, "truth '" + path + "'");
  const std::string where = "truth '" + path + "'";
  Truth t;
  const auto p = get_dims(doc, "p", where);
  t.B = DenseTensor(p, get_numbers(doc, "B", product(p), where));
  t.rho = get_as<double>(doc, "rho", where);
  t.tau2 = get_as<double>(doc, "tau2", where);
  const auto rank = get_as<std::size_t>(doc, "rank", where);
  const auto& factors = require(doc, "factors", where);
  if (!factors.is_array() || factors.size() != p.size()) throw ValidationError(where + ": one factor per mode required");
  for (std::size_t d = 0; d < p.size(); ++d) {
    const json wrap = {{"f", factors[d]}};
    const auto v = get_numbers(wrap, "f", p[d] * rank, where);
    t.cp.factors.push_back(Eigen::Map<const Eigen::MatrixXd>(v.data(), static_cast<Eigen::Index>(p[d]),
                                                             static_cast<Eigen::Index>(rank)));
  }
  for (auto d : p) t.sigma.push_back(equicorrelation(d, t.rho));
  return t;
}

// Standardization ----------------------------------------------------------

Standardization Standardization::fit(const ClusteredDataset& ds) {
  require_valid(ds);
  const auto pstar = static_cast<Eigen::Index>(product(ds.p));
  const auto qstar = static_cast<Eigen::Index>(product(ds.q));
  Standardization s{Eigen::VectorXd::Zero(pstar), Eigen::VectorXd::Zero(pstar), Eigen::VectorXd::Zero(qstar),
                    Eigen::VectorXd::Zero(qstar)};
  const auto n = static_cast<double>(ds.total_obs());
  for (const auto& sub : ds.subjects)
    for (const auto& o : sub.obs) {
      s.x_mean += o.x.vec();
      s.z_mean += o.z.vec();
    }
  s.x_mean /= n;
  s.z_mean /= n;
  for (const auto& sub : ds.subjects)
    for (const auto& o : sub.obs) {
      s.x_sd.array() += (o.x.vec() - s.x_mean).array().square();
      s.z_sd.array() += (o.z.vec() - s.z_mean).array().square();
    }
  const double denom = n > 1 ? n - 1 : 1.0;
  auto finish = [denom](Eigen::VectorXd& sd) {
    sd = (sd / denom).cwiseSqrt();
    for (auto& v : sd) if (!(v > 0.0)) v = 1.0;
  };
  finish(s.x_sd);
  finish(s.z_sd);
  return s;
}

void Standardization::apply(ClusteredDataset& ds) const {
  if (static_cast<std::size_t>(x_mean.size()) != product(ds.p) ||
      static_cast<std::size_t>(z_mean.size()) != product(ds.q)) {
    throw DimensionError("standardization: covariate dims do not match");
  }
  for (auto& sub : ds.subjects)
    for (auto& o : sub.obs) {
      auto x = o.x.vec();
      x = ((x - x_mean).array() / x_sd.array()).matrix();
      auto z = o.z.vec();
      z = ((z - z_mean).array() / z_sd.array()).matrix();
    }
}

// Fit artifact --------------------------------------------------------------

void write_fit(const std::string& path, const FitArtifact& fit) {
  const auto& c = fit.chain;
  const auto& hp = c.meta.hp;
  json h;
  h["format"] = kFitFormat;
  h["version"] = kFitVersion;
  h["method"] = c.meta.method;
  h["p"] = c.meta.p;
  h["q"] = c.meta.q;
  h["k"] = c.meta.k;
  h["rank"] = hp.rank;
  h["a0"] = hp.a0;
  h["b0"] = hp.b0;
  std::vector<double> s2;
  for (std::size_t d = 0; d < c.meta.p.size(); ++d) s2.push_back(hp.sigma2_for(d));
  h["sigma2"] = s2;
  h["iters"] = hp.iters;
  h["burnin"] = hp.burnin;
  h["seed"] = hp.seed;
  h["projection_seed"] = c.meta.projection_seed;
  h["dataset_fingerprint"] = hex64(c.meta.dataset_fingerprint);
  h["keep_shrinkage"] = hp.keep_shrinkage;
  h["draws"] = c.size();
  if (fit.standardization) {
    const auto& s = *fit.standardization;
    h["standardization"] = {{"x_mean", vec_json(s.x_mean)}, {"x_sd", vec_json(s.x_sd)},
                            {"z_mean", vec_json(s.z_mean)}, {"z_sd", vec_json(s.z_sd)}};
  } else {
    h["standardization"] = nullptr;
  }

  auto out = open_out(path);
  out << h.dump() << '\n';
  for (std::size_t t = 0; t < c.size(); ++t) {
    const auto& snap = c.snapshots[t];
    json line;
    line["t"] = hp.burnin + t + 1;
    line["B"] = vec_json(snap.beta);
    json g = json::array();
    for (const auto& m : snap.gamma) g.push_back(mat_json(m));
    line["gamma"] = std::move(g);
    line["tau2"] = snap.tau2;
    if (!snap.lambda2.empty()) {
      json l = json::array();
      for (const auto& m : snap.lambda2) l.push_back(mat_json(m));
      line["lambda2"] = std::move(l);
      line["delta2"] = vec_json(snap.delta2);
    }
    out << line.dump() << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

FitArtifact read_fit(const std::string& path) {
  auto in = open_in(path);
  const std::string where = "fit artifact '" + path + "'";
  std::string line;
  if (!std::getline(in, line)) throw IoError(where + " is empty");
  json h;
  try {
    h = json::parse(line);
  } catch (const json::parse_error& e) {
    throw IoError("cannot parse header of " + where + ": " + e.what());
  }
  if (get_as<std::string>(h, "format", where) != kFitFormat) throw ValidationError(where + ": not a fit artifact");
  if (get_as<int>(h, "version", where) != kFitVersion) throw ValidationError(where + ": unsupported version");

  FitArtifact fit;
  auto& meta = fit.chain.meta;
  meta.method = get_as<std::string>(h, "method", where);
  meta.p = get_dims(h, "p", where);
  meta.q = get_dims(h, "q", where);
  meta.k = get_dims(h, "k", where);
  if (meta.p.size() != meta.q.size() || meta.k.size() != meta.q.size()) {
    throw ValidationError(where + ": p, q and k must have the same order");
  }
  meta.hp.rank = get_as<std::size_t>(h, "rank", where);
  meta.hp.k = meta.k;
  meta.hp.a0 = get_as<double>(h, "a0", where);
  meta.hp.b0 = get_as<double>(h, "b0", where);
  meta.hp.sigma2 = get_numbers(h, "sigma2", meta.p.size(), where);
  meta.hp.iters = get_as<std::size_t>(h, "iters", where);
  meta.hp.burnin = get_as<std::size_t>(h, "burnin", where);
  meta.hp.seed = get_as<std::uint64_t>(h, "seed", where);
  meta.hp.keep_shrinkage = get_as<bool>(h, "keep_shrinkage", where);
  meta.projection_seed = get_as<std::uint64_t>(h, "projection_seed", where);
  meta.dataset_fingerprint = parse_hex64(get_as<std::string>(h, "dataset_fingerprint", where), where);
  const auto draws = get_as<std::size_t>(h, "draws", where);
  const auto pstar = product(meta.p);
  const auto qstar = product(meta.q);
  const auto& st = require(h, "standardization", where);
  if (!st.is_null()) {
    auto vec = [&](const char* key, std::size_t n) {
      const auto v = get_numbers(st, key, n, where);
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n)));
    };
    fit.standardization = Standardization{vec("x_mean", pstar), vec("x_sd", pstar), vec("z_mean", qstar),
                                          vec("z_sd", qstar)};
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string w = where + " line " + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IoError("cannot parse " + w + ": " + e.what());
    }
    Snapshot snap;
    const auto b = get_numbers(j, "B", pstar, w);
    snap.beta = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(pstar));
    const auto& g = require(j, "gamma", w);
    if (!g.is_array() || g.size() != meta.k.size()) throw ValidationError(w + ": one gamma per mode required");
    for (std::size_t d = 0; d < meta.k.size(); ++d) {
      const json wrap = {{"g", g[d]}};
      const auto v = get_numbers(wrap, "g", meta.k[d] * meta.k[d], w);
      const auto kd = static_cast<Eigen::Index>(meta.k[d]);
      snap.gamma.emplace_back(Eigen::Map<const Eigen::MatrixXd>(v.data(), kd, kd));
    }
    snap.tau2 = get_as<double>(j, "tau2", w);
    if (j.contains("lambda2")) {
      const auto& l = j.at("lambda2");
      if (!l.is_array() || l.size() != meta.p.size()) throw ValidationError(w + ": one lambda2 per mode required");
      const auto K = meta.hp.rank;
      for (std::size_t d = 0; d < meta.p.size(); ++d) {
        const json wrap = {{"l", l[d]}};
        const auto v = get_numbers(wrap, "l", meta.p[d] * K, w);
        snap.lambda2.emplace_back(Eigen::Map<const Eigen::MatrixXd>(v.data(), static_cast<Eigen::Index>(meta.p[d]),
                                                                    static_cast<Eigen::Index>(K)));
      }
      const auto dv = get_numbers(j, "delta2", K, w);
      snap.delta2 = Eigen::Map<const Eigen::VectorXd>(dv.data(), static_cast<Eigen::Index>(K));
    }
    fit.chain.snapshots.push_back(std::move(snap));
  }
  if (fit.chain.size() != draws) {
    throw ValidationError(where + ": header declares " + std::to_string(draws) + " draws, found " +
                          std::to_string(fit.chain.size()));
  }
  return fit;
}

// Tables ------------------------------------------------------------------

void write_predictions_csv(std::ostream& out, const std::vector<std::vector<PredictionInterval>>& subjects) {
  out << "subject,observation,prediction,lo,hi\n";
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    for (std::size_t j = 0; j < subjects[i].size(); ++j) {
      const auto& p = subjects[i][j];
      out << i + 1 << ',' << j + 1 << ',' << format_double(p.point) << ',' << format_double(p.lo) << ','
          << format_double(p.hi) << '\n';
    }
  }
}

void write_selection_csv(std::ostream& out, const Dims& p, const DenseTensor& median,
                         const CellIntervals& ci, const std::vector<bool>& s2m,
                         const std::vector<bool>& by_ci) {
  out << "cell";
  for (std::size_t d = 0; d < p.size(); ++d) out << ",i" << d + 1;
  out << ",median,lo,hi,s2m,ci\n";
  std::vector<std::size_t> idx(p.size(), 0);
  for (std::size_t c = 0; c < median.size(); ++c) {
    out << c + 1;
    for (auto v : idx) out << ',' << v + 1;
    out << ',' << format_double(median.data()[c]) << ',' << format_double(ci.lo.data()[c]) << ','
        << format_double(ci.hi.data()[c]) << ',' << (s2m[c] ? 1 : 0) << ',' << (by_ci[c] ? 1 : 0) << '\n';
    for (std::size_t d = 0; d < idx.size(); ++d) {
      if (++idx[d] < p[d]) break;
      idx[d] = 0;
    }
  }
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
  out << "replication,m,k,rank,method,rmse,rmspe,coverage,width,f1,ok,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    for (auto& ch : err)
      if (ch == '"' || ch == ',' || ch == '\n') ch = ' ';
    out << r.replication + 1 << ',' << r.m << ',' << r.k << ',' << r.rank << ',' << r.method << ','
        << format_double(r.rmse) << ',' << format_double(r.rmspe) << ',' << format_double(r.coverage) << ','
        << format_double(r.width) << ',' << format_double(r.f1) << ',' << (r.ok ? 1 : 0) << ',' << err << '\n';
  }
}

std::string benchmark_summary_json(const BenchmarkConfig& cfg, const BenchmarkReport& report) {
  json c;
  c["dims"] = cfg.sim.dims;
  c["true_rank"] = cfg.sim.true_rank;
  c["density"] = cfg.sim.density;
  c["rho"] = cfg.sim.rho;
  c["tau2"] = cfg.sim.tau2;
  c["n"] = cfg.sim.n;
  c["n_test"] = cfg.sim.n_test;
  c["replications"] = cfg.sim.replications;
  c["seed"] = cfg.sim.seed;
  c["methods"] = cfg.methods;
  c["m_values"] = cfg.m_values;
  c["k_values"] = cfg.k_values;
  c["rank_values"] = cfg.rank_values;
  c["iters"] = cfg.iters;
  c["burnin"] = cfg.burnin;
  c["level"] = cfg.level;

  std::size_t failed = 0;
  for (const auto& r : report.rows) failed += r.ok ? 0 : 1;
  json cells = json::array();
  for (const auto& s : report.summary) {
    cells.push_back({{"m", s.m}, {"k", s.k}, {"rank", s.rank}, {"method", s.method}, {"count", s.count},
                     {"rmse", stat_json(s.rmse)}, {"rmspe", stat_json(s.rmspe)},
                     {"coverage", stat_json(s.coverage)}, {"width", stat_json(s.width)}, {"f1", stat_json(s.f1)}});
  }
  json doc;
  doc["config"] = std::move(c);
  doc["rows"] = report.rows.size();
  doc["failed_rows"] = failed;
  doc["summary"] = std::move(cells);
  return doc.dump(2) + "\n";
}

std::string geweke_json(const GewekeConfig& cfg, const GewekeResult& result) {
  json stats = json::array();
  for (const auto& s : result.stats) {
    stats.push_back({{"name", s.name}, {"forward_mean", s.forward_mean}, {"forward_se", s.forward_se},
                     {"successive_mean", s.successive_mean}, {"successive_se", s.successive_se},
                     {"z", s.z}, {"gated", s.gated}, {"pass", s.pass}});
  }
  json doc;
  doc["config"] = {{"p", cfg.p}, {"q", cfg.q}, {"k", cfg.k}, {"rank", cfg.rank}, {"subjects", cfg.subjects},
                   {"obs_per_subject", cfg.obs_per_subject}, {"forward_draws", cfg.forward_draws},
                   {"sweeps", cfg.sweeps}, {"chains", cfg.chains}, {"a0", cfg.a0}, {"b0", cfg.b0}, {"sigma2", cfg.sigma2},
                   {"threshold", cfg.threshold}, {"seed", cfg.seed}};
  doc["stats"] = std::move(stats);
  doc["pass"] = result.pass;
  return doc.dump(2) + "\n";
}

}  // namespace comet
