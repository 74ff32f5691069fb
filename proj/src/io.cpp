#include "scatter/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "scatter/forward.hpp"
#include "scatter/numeric.hpp"

namespace scatter {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_num(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::parse, "config line " + std::to_string(line) +
                                 ": expected a number, got '" + s + "'");
  }
}

std::map<std::string, std::string> parse_kv_tokens(const std::string& rest, int line) {
  std::map<std::string, std::string> kv;
  std::istringstream is(rest);
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::parse,
                  "config line " + std::to_string(line) + ": expected key=value, got '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

HalfLineFunction load_sampled_file(const std::string& path, int line) {
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::parse, "config line " + std::to_string(line) +
                                 ": cannot open sampled file '" + path + "'");
  std::vector<double> x;
  std::vector<cd> v;
  std::string row;
  while (std::getline(in, row)) {
    row = trim(row);
    if (row.empty() || row[0] == '#') continue;
    std::replace(row.begin(), row.end(), ',', ' ');
    std::istringstream rs(row);
    double xx, re, im = 0.0;
    if (!(rs >> xx >> re)) continue;  // header line
    rs >> im;
    x.push_back(xx);
    v.push_back(cd(re, im));
  }
  if (x.size() < 2)
    throw Error(Errc::parse, "sampled file '" + path + "' has fewer than 2 rows");
  // conservative tail bound from the last sample
  const double C = std::abs(v.back()) * (1.0 + x.back()) * (1.0 + x.back()) + 1e-30;
  return HalfLineFunction::sampled(std::move(x), std::move(v), C);
}

double rel_l2_error(const std::vector<double>& got, const std::vector<double>& want,
                    const std::vector<double>& weights) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num += weights[i] * (got[i] - want[i]) * (got[i] - want[i]);
    den += weights[i] * want[i] * want[i];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

double RunConfig::tol_or(const std::string& key, double fallback) const {
  const auto it = tol.find(key);
  return it == tol.end() ? fallback : it->second;
}

SpectralGrid RunConfig::make_grid() const {
  return SpectralGrid::uniform(lambda_max, grid_points / 2);
}

RunConfig load_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;

    if (s.rfind("term", 0) == 0 && (s.size() == 4 || s[4] == ' ' || s[4] == '\t')) {
      auto kv = parse_kv_tokens(s.substr(4), line);
      if (!kv.count("alpha") || !kv.count("kind"))
        throw Error(Errc::parse,
                    "config line " + std::to_string(line) + ": term needs alpha= and kind=");
      PotentialTerm term;
      term.alpha = parse_num(kv["alpha"], line);
      if (term.alpha == 0.0)
        throw Error(Errc::parse, "config line " + std::to_string(line) +
                                     ": coupling must be nonzero");
      const std::string kind = kv["kind"];
      if (kind == "exp_decay") {
        if (!kv.count("a"))
          throw Error(Errc::parse, "config line " + std::to_string(line) + ": exp_decay needs a=");
        term.v = HalfLineFunction::exp_decay(parse_num(kv["a"], line));
      } else if (kind == "band_bump") {
        if (!kv.count("lo") || !kv.count("hi"))
          throw Error(Errc::parse,
                      "config line " + std::to_string(line) + ": band_bump needs lo= and hi=");
        term.v = HalfLineFunction::band_bump(parse_num(kv["lo"], line), parse_num(kv["hi"], line));
      } else if (kind == "sampled") {
        if (!kv.count("file"))
          throw Error(Errc::parse, "config line " + std::to_string(line) + ": sampled needs file=");
        term.v = load_sampled_file(kv["file"], line);
      } else {
        throw Error(Errc::parse, "config line " + std::to_string(line) +
                                     ": unknown catalog kind '" + kind + "'");
      }
      const double nrm = term.v.l2_norm();
      if (std::abs(nrm - 1.0) > 1e-6) {
        term.v = term.v.normalized();
        term.alpha *= nrm * nrm;
        cfg.notes.push_back("term on line " + std::to_string(line) + " renormalized (||v|| = " +
                            std::to_string(nrm) + "), coupling rescaled accordingly");
      }
      cfg.potential.terms.push_back(std::move(term));
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::parse, "config line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key == "workflow") {
      cfg.workflow = val;
    } else if (key == "lambda_max") {
      cfg.lambda_max = parse_num(val, line);
    } else if (key == "grid_points") {
      cfg.grid_points = static_cast<int>(parse_num(val, line));
    } else if (key == "out_dir") {
      cfg.out_dir = val;
    } else if (key == "data_file") {
      cfg.data_file = val;
    } else if (key == "side_file") {
      cfg.side_file = val;
    } else if (key.rfind("tol.", 0) == 0) {
      cfg.tol[key.substr(4)] = parse_num(val, line);
    } else {
      throw Error(Errc::parse, "config line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }

  if (!(cfg.lambda_max > 0.0)) throw Error(Errc::parse, "config: lambda_max must be positive");
  if (cfg.grid_points < 64 || cfg.grid_points % 2 != 0)
    throw Error(Errc::parse, "config: grid_points must be even and >= 64");
  static const char* kWorkflows[] = {"forward", "invert", "roundtrip", "boundstates", "verify"};
  if (std::find(std::begin(kWorkflows), std::end(kWorkflows), cfg.workflow) ==
      std::end(kWorkflows))
    throw Error(Errc::parse, "config: unknown workflow '" + cfg.workflow + "'");
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return load_config(os.str());
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
  for (std::size_t c = 0; c < header.size(); ++c)
    out << header[c] << (c + 1 < header.size() ? "," : "");
  out << "\n";
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c)
      out << format_g17(columns[c][r]) << (c + 1 < columns.size() ? "," : "");
    out << "\n";
  }
}

void write_svg(const std::string& path, const std::string& title,
               const std::vector<double>& x,
               const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const double W = 800, H = 500, ml = 60, mr = 20, mt = 40, mb = 40;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (double v : x) {
    xmin = std::min(xmin, v);
    xmax = std::max(xmax, v);
  }
  for (const auto& s : series)
    for (double v : s.second)
      if (std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  const double yspan = ymax - ymin;
  ymin -= 0.05 * yspan;
  ymax += 0.05 * yspan;
  auto X = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto Y = [&](double v) { return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
  char buf[128];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\">\n";
  out << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  out << "<text x=\"20\" y=\"24\" font-family=\"monospace\" font-size=\"15\">" << title
      << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml,
                H - mb, W - mr, H - mb);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml,
                H - mb, ml, mt);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" font-family=\"monospace\" font-size=\"11\">%.6g</text>\n",
                ml, H - mb + 16.0, xmin);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" font-family=\"monospace\" font-size=\"11\">%.6g</text>\n",
                W - mr - 40.0, H - mb + 16.0, xmax);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" font-family=\"monospace\" font-size=\"11\">%.6g</text>\n",
                4.0, H - mb, ymin);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" font-family=\"monospace\" font-size=\"11\">%.6g</text>\n",
                4.0, mt + 6.0, ymax);
  out << buf;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    bool broke = true;
    for (std::size_t i = 0; i < x.size() && i < series[s].second.size(); ++i) {
      const double v = series[s].second[i];
      if (!std::isfinite(v)) {
        if (!broke) {
          out << "\"/>\n<polyline fill=\"none\" stroke=\"" << color
              << "\" stroke-width=\"1.2\" points=\"";
          broke = true;
        }
        continue;
      }
      std::snprintf(buf, sizeof buf, "%.6g,%.6g ", X(x[i]), Y(v));
      out << buf;
      broke = false;
    }
    out << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-family=\"monospace\" font-size=\"12\" "
                  "fill=\"%s\">%s</text>\n",
                  W - mr - 180.0, mt + 18.0 * (s + 1), color, series[s].first.c_str());
    out << buf;
  }
  out << "</svg>\n";
}

void write_scattering_data(const std::string& csv_path, const std::string& side_path,
                           const ScatteringData& data) {
  std::vector<std::vector<double>> cols(2);
  for (int i = 0; i < data.grid.size(); ++i) {
    cols[0].push_back(data.grid[i]);
    cols[1].push_back(data.zeta[static_cast<std::size_t>(i)]);
  }
  write_csv(csv_path, {"lambda", "zeta"}, cols);
  std::ofstream out(side_path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write '" + side_path + "'");
  out << "class "
      << (data.tag == DataClass::omega0
              ? "omega0"
              : (data.tag == DataClass::omega_q ? "omega_q" : "omega_q_kappa"))
      << "\n";
  for (double z : data.real_zeros) out << "zero " << format_g17(z) << "\n";
  for (double k : data.kappas) out << "kappa " << format_g17(k) << "\n";
}

ScatteringData load_scattering_data(const std::string& csv_path,
                                    const std::string& side_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error(Errc::io, "cannot open '" + csv_path + "'");
  std::vector<double> lam, zeta;
  std::string row;
  while (std::getline(in, row)) {
    row = trim(row);
    if (row.empty() || row[0] == '#') continue;
    std::replace(row.begin(), row.end(), ',', ' ');
    std::istringstream rs(row);
    double l, z;
    if (!(rs >> l >> z)) continue;
    lam.push_back(l);
    zeta.push_back(z);
  }
  ScatteringData data;
  data.grid = SpectralGrid::from_points(lam);
  data.zeta = std::move(zeta);
  data.valid.assign(static_cast<std::size_t>(data.grid.size()), true);
  data.valid[static_cast<std::size_t>(data.grid.zero_index())] = false;

  if (!side_path.empty()) {
    std::ifstream side(side_path);
    if (!side) throw Error(Errc::io, "cannot open '" + side_path + "'");
    std::string key;
    while (side >> key) {
      if (key == "zero") {
        double z;
        side >> z;
        data.real_zeros.push_back(z);
      } else if (key == "kappa") {
        double k;
        side >> k;
        data.kappas.push_back(k);
      } else if (key == "class") {
        std::string tag;
        side >> tag;
        data.tag = tag == "omega0" ? DataClass::omega0
                                   : (tag == "omega_q" ? DataClass::omega_q
                                                       : DataClass::omega_q_kappa);
      } else {
        throw Error(Errc::parse, "side file: unknown key '" + key + "'");
      }
    }
  }
  std::sort(data.real_zeros.begin(), data.real_zeros.end());
  return data;
}

// ---------------------------------------------------------------------------
// workflows

namespace {

struct ForwardArtifacts {
  SpectralGrid grid;
  TransformSet ts;
  ScatteringProfile profile;
  std::vector<BoundState> bound;
  double transform_identity = 0.0;
  double factor_product = 0.0;
  double det_identity = 0.0;
  double unimodularity = 0.0;
  double symmetry = 0.0;
  double parseval_worst = 0.0;
};

ForwardArtifacts compute_forward(const RunConfig& cfg) {
  ForwardArtifacts art;
  art.grid = cfg.make_grid();
  art.ts = build_transforms(cfg.potential, art.grid);
  art.profile = scattering_profile(cfg.potential, art.ts);
  art.bound = find_bound_states(cfg.potential, art.ts);

  const int n = cfg.potential.n();
  const int N = art.grid.size();
  // transform identity on [-20, 20]
  for (int i = 0; i < N; ++i) {
    const double lam = art.grid[i];
    if (std::abs(lam) > 20.0) continue;
    const int mi = art.grid.mirror(i);
    for (int s = 0; s < n; ++s)
      for (int k = 0; k < n; ++k) {
        const cd lhs = art.ts.Phi_at(s, k, i) + std::conj(art.ts.Phi_at(k, s, i));
        const cd rhs = std::conj(art.ts.vt_at(s, mi)) * art.ts.vt_at(k, mi);
        art.transform_identity = std::max(art.transform_identity, std::abs(lhs - rhs));
      }
  }
  // S = prod Sk, |S| = 1, S(-l) = conj S(l)
  for (int i = 0; i < N; ++i) {
    if (!art.profile.node_ok(i)) continue;
    const cd S = art.profile.S[static_cast<std::size_t>(i)];
    cd prod = 1.0;
    bool all = true;
    for (int k = 0; k < n; ++k) {
      const cd sk = art.profile.Sk[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      all = all && std::isfinite(sk.real());
      prod *= sk;
    }
    if (all) art.factor_product = std::max(art.factor_product, std::abs(S - prod));
    art.unimodularity = std::max(art.unimodularity, std::abs(std::abs(S) - 1.0));
    const int mi = art.grid.mirror(i);
    if (art.profile.node_ok(mi))
      art.symmetry = std::max(
          art.symmetry, std::abs(art.profile.S[static_cast<std::size_t>(mi)] - std::conj(S)));
  }
  // determinant identity at fixed pseudo-random z off the axis
  std::mt19937 rng(20240611u);
  std::uniform_real_distribution<double> ur(-8.0, 8.0), ui(0.1, 4.0);
  for (int t = 0; t < 8; ++t) {
    const cd z(ur(rng), (t % 2 ? 1.0 : -1.0) * ui(rng));
    const ResolventMatrix rm = resolvent_T(art.ts, z);
    Eigen::MatrixXcd IaT = Eigen::MatrixXcd::Identity(n, n);
    for (int s = 0; s < n; ++s)
      for (int k = 0; k < n; ++k) IaT(s, k) += cfg.potential.alpha(s) * rm.T(s, k);
    const cd det = IaT.determinant();
    const BkChain ch = bk_chain_from(rm.T, rm.alpha);
    art.det_identity = std::max(art.det_identity,
                                std::abs(det - ch.product) / (1.0 + std::abs(det)));
  }
  for (int k = 0; k < n; ++k) {
    const double nrm = parseval_W_norm(art.ts.W[static_cast<std::size_t>(k)], art.grid);
    art.parseval_worst =
        std::max(art.parseval_worst, std::abs(nrm - 4.0 * pi) / (4.0 * pi));
  }
  return art;
}

void write_profile_csv(const std::string& path, const ForwardArtifacts& art) {
  const int n = art.ts.n();
  const int N = art.grid.size();
  std::vector<std::string> header = {"lambda", "re_r", "im_r", "re_S", "im_S", "abs_S"};
  for (int k = 0; k < n; ++k) {
    header.push_back("re_S" + std::to_string(k + 1));
    header.push_back("im_S" + std::to_string(k + 1));
  }
  std::vector<std::vector<double>> cols(header.size(),
                                        std::vector<double>(static_cast<std::size_t>(N)));
  for (int i = 0; i < N; ++i) {
    const std::size_t ii = static_cast<std::size_t>(i);
    cols[0][ii] = art.grid[i];
    cols[1][ii] = art.profile.r[ii].real();
    cols[2][ii] = art.profile.r[ii].imag();
    cols[3][ii] = art.profile.S[ii].real();
    cols[4][ii] = art.profile.S[ii].imag();
    cols[5][ii] = std::abs(art.profile.S[ii]);
    for (int k = 0; k < n; ++k) {
      cols[6 + 2 * static_cast<std::size_t>(k)][ii] = art.profile.Sk[static_cast<std::size_t>(k)][ii].real();
      cols[7 + 2 * static_cast<std::size_t>(k)][ii] = art.profile.Sk[static_cast<std::size_t>(k)][ii].imag();
    }
  }
  write_csv(path, header, cols);
}

void write_boundstate_table(const std::string& path, const RunConfig& cfg,
                            const ForwardArtifacts& art) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
  out << "# kappa  energy  residual  eigenfunction_tail_fraction\n";
  std::vector<double> xg(601);
  for (std::size_t j = 0; j < xg.size(); ++j) xg[j] = 30.0 * j / (xg.size() - 1);
  for (const auto& bs : art.bound) {
    const std::vector<cd> e = boundstate_eigenfunction(bs, cfg.potential, art.ts, xg);
    const std::vector<double> w = sample_quad_weights(xg);
    double tail = 0.0, all = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
      all += w[j] * std::norm(e[j]);
      if (xg[j] > 0.75 * xg.back()) tail += w[j] * std::norm(e[j]);
    }
    out << format_g17(bs.kappa) << "  " << format_g17(bs.energy) << "  "
        << format_g17(bs.residual) << "  " << format_g17(tail / std::max(all, 1e-300))
        << "\n";
  }
  if (art.bound.empty()) out << "# no bound states\n";
}

int forward_report(const RunConfig& cfg, const ForwardArtifacts& art, std::ostream& log,
                   const std::string& report_path) {
  const double tol_id = cfg.tol_or("identity", 1e-6);
  const double tol_fac = cfg.tol_or("factorization", 1e-6);
  const double tol_det = cfg.tol_or("determinant", 1e-8);
  const double tol_uni = cfg.tol_or("unimodularity", 1e-6);
  const double tol_sym = cfg.tol_or("symmetry", 1e-10);
  const double tol_par = cfg.tol_or("parseval", 0.01);

  struct Row {
    const char* name;
    double value;
    double tol;
  } rows[] = {
      {"transform identity", art.transform_identity, tol_id},
      {"factorization S = prod S_k", art.factor_product, tol_fac},
      {"determinant identity", art.det_identity, tol_det},
      {"unimodularity", art.unimodularity, tol_uni},
      {"conjugate symmetry", art.symmetry, tol_sym},
      {"Parseval norm (relative)", art.parseval_worst, tol_par},
  };
  std::ostringstream os;
  bool pass = true;
  for (const Row& r : rows) {
    const bool ok = r.value <= r.tol;
    pass = pass && ok;
    os << (ok ? "PASS " : "FAIL ") << r.name << ": " << r.value << " (tol " << r.tol
       << ")\n";
  }
  os << "bound states: " << art.bound.size() << "\n";
  for (const auto& bs : art.bound)
    os << "  kappa = " << format_g17(bs.kappa) << ", residual = " << bs.residual << "\n";
  for (const auto& note : cfg.notes) os << "note: " << note << "\n";
  std::ofstream rep(report_path, std::ios::binary);
  rep << os.str();
  log << os.str();
  return pass ? 0 : 1;
}

std::vector<double> truth_wsq(const ForwardArtifacts& art, int k) {
  std::vector<double> out(static_cast<std::size_t>(art.grid.size()));
  for (int i = 0; i < art.grid.size(); ++i)
    out[static_cast<std::size_t>(i)] = std::norm(art.ts.W_at(k, i));
  return out;
}

int roundtrip_channel(const RunConfig& cfg, const ForwardArtifacts& art,
                      const std::vector<cd>& Sk_samples, int k,
                      const std::vector<double>& zeros, const std::vector<double>& kappas,
                      std::ostream& log, std::vector<std::vector<double>>* overlay) {
  ScatteringData data =
      extract_zeta(art.grid, Sk_samples, PhaseInput::s_samples, zeros, kappas);
  const ReconstructionResult rec = reconstruct(data);

  const double alpha_true = cfg.potential.alpha(k);
  const double alpha_err = std::abs(rec.alpha - alpha_true) / std::abs(alpha_true);

  const std::vector<double> wtrue = truth_wsq(art, k);
  std::vector<double> got, want, wts;
  const auto& qw = art.grid.quad_weights();
  for (int i = 0; i < art.grid.size(); ++i) {
    const double lam = art.grid[i];
    if (lam < 0.0 || lam > 20.0 || art.grid.flagged(lam)) continue;
    got.push_back(rec.Wabs_sq[static_cast<std::size_t>(i)]);
    want.push_back(wtrue[static_cast<std::size_t>(i)]);
    wts.push_back(qw[static_cast<std::size_t>(i)]);
  }
  const double wsq_err = rel_l2_error(got, want, wts);

  const double tol_alpha = cfg.tol_or("alpha_rel", 0.01);
  const double tol_wsq = cfg.tol_or("wsq_rel", 0.01);
  const bool ok = alpha_err <= tol_alpha && wsq_err <= tol_wsq;
  log << (ok ? "PASS" : "FAIL") << " channel " << (k + 1) << ": alpha = " << rec.alpha
      << " (true " << alpha_true << ", rel err " << alpha_err << "), |W|^2 rel-L2 err = "
      << wsq_err << ", ||v|| = " << rec.v_norm << "\n";

  if (overlay) {
    overlay->push_back(wtrue);
    overlay->push_back(rec.Wabs_sq);
  }
  return ok ? 0 : 1;
}

}  // namespace

int run_forward(const RunConfig& cfg, std::ostream& log) {
  fs::create_directories(cfg.out_dir);
  const ForwardArtifacts art = compute_forward(cfg);
  write_profile_csv(cfg.out_dir + "/profile.csv", art);
  write_boundstate_table(cfg.out_dir + "/bound_states.txt", cfg, art);

  std::vector<double> lam(static_cast<std::size_t>(art.grid.size()));
  std::vector<double> reS(lam.size()), imS(lam.size()), absS(lam.size());
  for (int i = 0; i < art.grid.size(); ++i) {
    lam[static_cast<std::size_t>(i)] = art.grid[i];
    const cd S = art.profile.S[static_cast<std::size_t>(i)];
    reS[static_cast<std::size_t>(i)] = S.real();
    imS[static_cast<std::size_t>(i)] = S.imag();
    absS[static_cast<std::size_t>(i)] = std::abs(S);
  }
  write_svg(cfg.out_dir + "/scattering.svg", "scattering function", lam,
            {{"Re S", reS}, {"Im S", imS}, {"|S|", absS}});
  return forward_report(cfg, art, log, cfg.out_dir + "/identity_report.txt");
}

int run_boundstates(const RunConfig& cfg, std::ostream& log) {
  fs::create_directories(cfg.out_dir);
  ForwardArtifacts art;
  art.grid = cfg.make_grid();
  art.ts = build_transforms(cfg.potential, art.grid);
  art.bound = find_bound_states(cfg.potential, art.ts);
  write_boundstate_table(cfg.out_dir + "/bound_states.txt", cfg, art);
  log << art.bound.size() << " bound state(s) written to " << cfg.out_dir
      << "/bound_states.txt\n";
  return 0;
}

int run_roundtrip(const RunConfig& cfg, std::ostream& log) {
  fs::create_directories(cfg.out_dir);
  const ForwardArtifacts art = compute_forward(cfg);
  const int n = cfg.potential.n();

  int rc = 0;
  std::vector<std::vector<double>> overlay;
  if (n == 1) {
    std::vector<double> zeros = art.profile.real_zeros;
    std::vector<double> kappas;
    for (const auto& bs : art.bound) kappas.push_back(bs.kappa);
    rc = roundtrip_channel(cfg, art, art.profile.S, 0, zeros, kappas, log, &overlay);
  } else {
    // channel separation requires an L0-orthogonal kernel
    const ResolventMatrix rm = resolvent_T(art.ts, cd(0.7, 1.3));
    double offdiag = 0.0;
    for (int s = 0; s < n; ++s)
      for (int k = 0; k < n; ++k)
        if (s != k) offdiag = std::max(offdiag, std::abs(rm.T(s, k)));
    if (offdiag > 1e-6)
      throw Error(Errc::domain,
                  "roundtrip: channels are coupled (off-diagonal resolvent " +
                      std::to_string(offdiag) + "); only L0-orthogonal kernels separate");
    for (int k = 0; k < n; ++k) {
      // the channel's own forward problem supplies its zero and kappa lists
      SeparablePotential sub;
      sub.terms.push_back(cfg.potential.terms[static_cast<std::size_t>(k)]);
      TransformSet sub_ts = build_transforms(sub, art.grid);
      const ScatteringProfile sub_profile = scattering_profile(sub, sub_ts);
      std::vector<double> kappas;
      for (const auto& bs : find_bound_states(sub, sub_ts)) kappas.push_back(bs.kappa);
      rc |= roundtrip_channel(cfg, art, art.profile.Sk[static_cast<std::size_t>(k)], k,
                              sub_profile.real_zeros, kappas, log, &overlay);
    }
  }

  std::vector<double> lam(static_cast<std::size_t>(art.grid.size()));
  for (int i = 0; i < art.grid.size(); ++i) lam[static_cast<std::size_t>(i)] = art.grid[i];
  std::vector<std::pair<std::string, std::vector<double>>> series;
  std::vector<std::vector<double>> cols = {lam};
  std::vector<std::string> header = {"lambda"};
  for (std::size_t c = 0; c < overlay.size(); c += 2) {
    series.push_back({"true |W|^2 ch" + std::to_string(c / 2 + 1), overlay[c]});
    series.push_back({"recovered ch" + std::to_string(c / 2 + 1), overlay[c + 1]});
    header.push_back("true_wsq_ch" + std::to_string(c / 2 + 1));
    header.push_back("rec_wsq_ch" + std::to_string(c / 2 + 1));
    cols.push_back(overlay[c]);
    cols.push_back(overlay[c + 1]);
  }
  write_csv(cfg.out_dir + "/roundtrip_wsq.csv", header, cols);
  write_svg(cfg.out_dir + "/roundtrip_wsq.svg", "recovered vs true |W|^2", lam, series);
  return rc;
}

int run_invert(const RunConfig& cfg, std::ostream& log) {
  if (cfg.data_file.empty())
    throw Error(Errc::parse, "invert workflow requires data_file = <csv>");
  fs::create_directories(cfg.out_dir);
  ScatteringData data = load_scattering_data(cfg.data_file, cfg.side_file);
  const ClassDiagnostics diag = validate_class(data);
  log << diag.report;
  const ReconstructionResult rec = reconstruct(data);

  std::vector<double> lam(static_cast<std::size_t>(data.grid.size()));
  for (int i = 0; i < data.grid.size(); ++i) lam[static_cast<std::size_t>(i)] = data.grid[i];
  write_csv(cfg.out_dir + "/recovered_wsq.csv", {"lambda", "wsq"}, {lam, rec.Wabs_sq});
  std::vector<double> vx, vv;
  for (std::size_t j = 0; j < rec.v_candidate.sample_x().size(); ++j) {
    vx.push_back(rec.v_candidate.sample_x()[j]);
    vv.push_back(rec.v_candidate.sample_v()[j].real());
  }
  write_csv(cfg.out_dir + "/recovered_v.csv", {"x", "v"}, {vx, vv});
  write_svg(cfg.out_dir + "/recovered_wsq.svg", "recovered |W|^2", lam,
            {{"|W|^2", rec.Wabs_sq}});

  std::ofstream sum(cfg.out_dir + "/invert_summary.txt", std::ios::binary);
  sum << "alpha " << format_g17(rec.alpha) << "\n"
      << "alpha_legacy_constant " << format_g17(rec.alpha_legacy) << "\n"
      << "v_norm " << format_g17(rec.v_norm) << "\n"
      << "floor_magnitude " << format_g17(rec.floor_magnitude) << "\n\n"
      << diag.report;
  log << "alpha = " << rec.alpha << ", ||v|| = " << rec.v_norm << "\n";
  return 0;
}

int run_verify(const RunConfig& cfg, std::ostream& log) {
  fs::create_directories(cfg.out_dir);
  const ForwardArtifacts art = compute_forward(cfg);
  int rc = forward_report(cfg, art, log, cfg.out_dir + "/identity_report.txt");

  // bound-state count never exceeds the number of negative couplings
  const int nneg = cfg.potential.negative_count();
  int count = 0;
  for (const auto& bs : art.bound) count += bs.multiplicity;
  const bool count_ok = count <= nneg;
  log << (count_ok ? "PASS" : "FAIL") << " bound-state count " << count << " <= " << nneg
      << "\n";
  rc |= count_ok ? 0 : 1;

  // auxiliary factor is kappa-independent
  double psi_dev = 0.0;
  for (double l : {0.5, 1.0, 2.5, 5.0, 10.0})
    psi_dev = std::max(psi_dev, std::abs(aux_psi(l, 0.5) - aux_psi(l, 2.0)) / aux_psi(l, 1.0));
  const bool psi_ok = psi_dev <= cfg.tol_or("psi_kappa", 1e-3);
  log << (psi_ok ? "PASS" : "FAIL") << " psi kappa-independence: " << psi_dev << "\n";
  rc |= psi_ok ? 0 : 1;

  if (cfg.potential.n() == 1) {
    std::vector<double> kappas;
    for (const auto& bs : art.bound) kappas.push_back(bs.kappa);
    rc |= roundtrip_channel(cfg, art, art.profile.S, 0, art.profile.real_zeros, kappas,
                            log, nullptr);
  }
  return rc;
}

int run_workflow(const RunConfig& cfg, std::ostream& log) {
  if (cfg.workflow == "forward") return run_forward(cfg, log);
  if (cfg.workflow == "boundstates") return run_boundstates(cfg, log);
  if (cfg.workflow == "roundtrip") return run_roundtrip(cfg, log);
  if (cfg.workflow == "invert") return run_invert(cfg, log);
  if (cfg.workflow == "verify") return run_verify(cfg, log);
  throw Error(Errc::parse, "unknown workflow '" + cfg.workflow + "'");
}

}  // namespace scatter
