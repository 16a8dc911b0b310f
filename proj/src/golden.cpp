#include "stsd/golden.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stsd/error.hpp"

namespace stsd {

namespace {

struct InstanceParams {
  std::uint64_t seed;
  int mt, mr, q;
  double snr_db;
  double l_e_max_normalized;
  EnumMode mode;
  double apriori_sigma;
};

// Fixed regression set. Changing it invalidates stored vectors.
const InstanceParams kInstances[] = {
    {1, 2, 2, 2, 6.0, kInf, EnumMode::hybrid, 0.0},
    {2, 2, 2, 2, 6.0, kInf, EnumMode::hybrid, 2.0},
    {3, 2, 2, 2, 6.0, kInf, EnumMode::full_sort_se, 2.0},
    {4, 2, 2, 2, 6.0, kInf, EnumMode::channel_only, 2.0},
    {5, 2, 2, 2, 3.0, 0.2, EnumMode::hybrid, 3.0},
    {6, 4, 4, 4, 14.0, kInf, EnumMode::hybrid, 0.0},
    {7, 4, 4, 4, 14.0, kInf, EnumMode::hybrid, 3.0},
    {8, 4, 4, 4, 14.0, 0.8, EnumMode::hybrid, 3.0},
    {9, 4, 4, 4, 14.0, 0.2, EnumMode::hybrid, 3.0},
    {10, 4, 4, 4, 14.0, 0.05, EnumMode::full_sort_se, 3.0},
    {11, 4, 4, 4, 12.0, kInf, EnumMode::full_sort_se, 3.0},
    {12, 3, 4, 4, 12.0, 0.4, EnumMode::channel_only, 2.0},
    {13, 2, 2, 6, 18.0, kInf, EnumMode::hybrid, 4.0},
    {14, 2, 3, 6, 18.0, 0.8, EnumMode::hybrid, 4.0},
};

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw Error(ErrorCode::invalid_argument, "golden: bad number '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok) {
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
    throw Error(ErrorCode::invalid_argument, "golden: bad integer '" + tok + "'");
  return v;
}

std::uint64_t parse_count(const std::string& tok) {
  const long long v = parse_int(tok);
  if (v < 0) throw Error(ErrorCode::invalid_argument, "golden: negative count '" + tok + "'");
  return static_cast<std::uint64_t>(v);
}

DetectionResult run_record(const GoldenRecord& rec) {
  DetectorConfig cfg;
  cfg.l_e_max = rec.l_e_max;
  cfg.enum_mode = rec.enum_mode;
  SphereDecoder decoder(Constellation::qam(rec.q), cfg);
  return decoder.detect(rec.y_tilde, rec.r, rec.l_a, rec.n0);
}

// Reads "key v1 v2 ..." lines.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> expect(const std::string& key) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::vector<std::string> toks;
      for (std::string t; ls >> t;) toks.push_back(t);
      if (toks.empty()) continue;
      if (toks[0] != key)
        throw Error(ErrorCode::invalid_argument,
                    "golden: line " + std::to_string(line_no_) + ": expected '" + key + "', got '" + toks[0] + "'");
      toks.erase(toks.begin());
      return toks;
    }
    throw Error(ErrorCode::invalid_argument, "golden: unexpected end of file, expected '" + key + "'");
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace

GoldenSet make_golden_set(QrdMode mode) {
  GoldenSet set;
  set.qrd_mode = mode;
  for (const auto& inst : kInstances) {
    const Constellation c = Constellation::qam(inst.q);
    Rng rng = make_stream(inst.seed, 0);
    const double n0 = noise_variance(inst.snr_db, inst.mt, c.energy());

    CVector s(inst.mt);
    std::uniform_int_distribution<int> pick(0, c.size() - 1);
    for (int i = 0; i < inst.mt; ++i) s(i) = c.point(pick(rng));
    const CMatrix h = sample_channel(inst.mr, inst.mt, rng);
    const CVector y = transmit(h, s, n0, rng);
    const QrFactors qr = mode == QrdMode::sqrd ? sqrd(h) : qrd(h);

    GoldenRecord rec;
    rec.seed = inst.seed;
    rec.q = inst.q;
    rec.n0 = n0;
    rec.l_e_max = inst.l_e_max_normalized == kInf ? kInf : inst.l_e_max_normalized / n0;
    rec.enum_mode = inst.mode;
    rec.y_tilde = preprocess(y, qr);
    rec.r = qr.r;
    rec.l_a = LlrFrame(inst.mt, inst.q, 0.0);
    std::normal_distribution<double> llr(0.0, inst.apriori_sigma > 0 ? inst.apriori_sigma : 1.0);
    if (inst.apriori_sigma > 0)
      for (auto& v : rec.l_a.values()) v = llr(rng);

    const DetectionResult res = run_record(rec);
    rec.lambda_map = res.lambda_map;
    rec.x_map = res.x_map;
    rec.l_e = res.l_e;
    rec.n_en = res.n_en;
    set.records.push_back(std::move(rec));
  }
  return set;
}

void write_golden(const std::filesystem::path& path, const GoldenSet& set) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << "# stsd golden vectors v1\n";
  out << "qrd " << to_string(set.qrd_mode) << '\n';
  out << "records " << set.records.size() << '\n';
  for (std::size_t k = 0; k < set.records.size(); ++k) {
    const GoldenRecord& r = set.records[k];
    const int mt = static_cast<int>(r.r.cols());
    out << "record " << k << '\n';
    out << "seed " << r.seed << '\n';
    out << "shape " << mt << ' ' << r.q << '\n';
    out << "n0 " << fmt(r.n0) << '\n';
    out << "lemax " << fmt(r.l_e_max) << '\n';
    out << "enum " << to_string(r.enum_mode) << '\n';
    out << "ytilde";
    for (int i = 0; i < mt; ++i) out << ' ' << fmt(r.y_tilde(i).real()) << ' ' << fmt(r.y_tilde(i).imag());
    out << "\nr";
    for (int i = 0; i < mt; ++i)
      for (int j = 0; j < mt; ++j) out << ' ' << fmt(r.r(i, j).real()) << ' ' << fmt(r.r(i, j).imag());
    out << "\nla";
    for (double v : r.l_a.values()) out << ' ' << fmt(v);
    out << "\nlambda " << fmt(r.lambda_map);
    out << "\nxmap";
    for (int v : r.x_map.values()) out << ' ' << v;
    out << "\nle";
    for (double v : r.l_e.values()) out << ' ' << fmt(v);
    out << "\nnen " << r.n_en << "\nend\n";
  }
  if (!out) throw Error(ErrorCode::io, "write failed: " + path.string());
}

GoldenSet read_golden(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  LineReader rd(in);
  auto one = [](const std::vector<std::string>& t, std::size_t n, const char* what) {
    if (t.size() != n) throw Error(ErrorCode::invalid_argument, std::string("golden: wrong field count for ") + what);
  };

  GoldenSet set;
  auto mode = rd.expect("qrd");
  one(mode, 1, "qrd");
  const auto parsed_mode = parse_qrd_mode(mode[0]);
  if (!parsed_mode) throw Error(ErrorCode::invalid_argument, "golden: unknown qrd mode " + mode[0]);
  set.qrd_mode = *parsed_mode;
  auto count = rd.expect("records");
  one(count, 1, "records");
  const std::size_t n = parse_count(count[0]);

  for (std::size_t k = 0; k < n; ++k) {
    rd.expect("record");
    GoldenRecord r;
    auto seed = rd.expect("seed");
    one(seed, 1, "seed");
    r.seed = parse_count(seed[0]);
    auto shape = rd.expect("shape");
    one(shape, 2, "shape");
    const int mt = static_cast<int>(parse_int(shape[0]));
    r.q = static_cast<int>(parse_int(shape[1]));
    if (mt < 1 || mt > 64 || (r.q != 2 && r.q != 4 && r.q != 6)) throw Error(ErrorCode::invalid_argument, "golden: bad shape");
    auto n0 = rd.expect("n0");
    one(n0, 1, "n0");
    r.n0 = parse_double(n0[0]);
    auto lemax = rd.expect("lemax");
    one(lemax, 1, "lemax");
    r.l_e_max = parse_double(lemax[0]);
    auto en = rd.expect("enum");
    one(en, 1, "enum");
    const auto em = parse_enum_mode(en[0]);
    if (!em) throw Error(ErrorCode::invalid_argument, "golden: unknown enum mode " + en[0]);
    r.enum_mode = *em;

    auto yt = rd.expect("ytilde");
    one(yt, 2 * mt, "ytilde");
    r.y_tilde = CVector(mt);
    for (int i = 0; i < mt; ++i) r.y_tilde(i) = {parse_double(yt[2 * i]), parse_double(yt[2 * i + 1])};
    auto rr = rd.expect("r");
    one(rr, 2 * mt * mt, "r");
    r.r = CMatrix(mt, mt);
    for (int i = 0; i < mt; ++i)
      for (int j = 0; j < mt; ++j)
        r.r(i, j) = {parse_double(rr[2 * (i * mt + j)]), parse_double(rr[2 * (i * mt + j) + 1])};
    auto la = rd.expect("la");
    one(la, std::size_t(mt) * r.q, "la");
    r.l_a = LlrFrame(mt, r.q);
    for (std::size_t k2 = 0; k2 < la.size(); ++k2) r.l_a.values()[k2] = parse_double(la[k2]);

    auto lam = rd.expect("lambda");
    one(lam, 1, "lambda");
    r.lambda_map = parse_double(lam[0]);
    auto xm = rd.expect("xmap");
    one(xm, std::size_t(mt) * r.q, "xmap");
    r.x_map = BitFrame(mt, r.q);
    for (std::size_t k2 = 0; k2 < xm.size(); ++k2) r.x_map.values()[k2] = static_cast<int>(parse_int(xm[k2]));
    auto le = rd.expect("le");
    one(le, std::size_t(mt) * r.q, "le");
    r.l_e = LlrFrame(mt, r.q);
    for (std::size_t k2 = 0; k2 < le.size(); ++k2) r.l_e.values()[k2] = parse_double(le[k2]);
    auto nen = rd.expect("nen");
    one(nen, 1, "nen");
    r.n_en = parse_count(nen[0]);
    rd.expect("end");
    set.records.push_back(std::move(r));
  }
  return set;
}

GoldenCheck check_golden(const GoldenSet& set, double tolerance) {
  GoldenCheck out;
  out.records = set.records.size();
  auto fail = [&](std::size_t k, const GoldenRecord& rec, const std::string& field, const std::string& expected,
                  const std::string& got) {
    out.ok = false;
    out.report = "record " + std::to_string(k) + " (seed " + std::to_string(rec.seed) + "): " + field +
                 " expected " + expected + " got " + got;
  };
  auto close = [&](double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= tolerance;
  };

  for (std::size_t k = 0; k < set.records.size() && out.ok; ++k) {
    const GoldenRecord& rec = set.records[k];
    const DetectionResult res = run_record(rec);
    if (!close(rec.lambda_map, res.lambda_map)) {
      fail(k, rec, "lambda", fmt(rec.lambda_map), fmt(res.lambda_map));
      break;
    }
    for (int i = 0; i < rec.x_map.rows() && out.ok; ++i)
      for (int b = 0; b < rec.x_map.cols() && out.ok; ++b) {
        const std::string at = "[" + std::to_string(i) + "][" + std::to_string(b) + "]";
        if (rec.x_map(i, b) != res.x_map(i, b))
          fail(k, rec, "xmap" + at, std::to_string(rec.x_map(i, b)), std::to_string(res.x_map(i, b)));
        else if (!close(rec.l_e(i, b), res.l_e(i, b)))
          fail(k, rec, "le" + at, fmt(rec.l_e(i, b)), fmt(res.l_e(i, b)));
      }
    if (out.ok && rec.n_en != res.n_en) fail(k, rec, "nen", std::to_string(rec.n_en), std::to_string(res.n_en));
  }
  return out;
}

}  // namespace stsd
