#include "latscope/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "latscope/counting.hpp"
#include "latscope/errors.hpp"
#include "latscope/wavelet.hpp"

namespace latscope {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw Error(msg);
}

double finite(double x, const char* who) {
  if (!std::isfinite(x)) throw Error(std::string(who) + ": non-finite scalar");
  return x;
}

Json vec_to_json(const Vec& v) {
  Json a = Json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(finite(v(i), "vec_to_json"));
  return a;
}

Vec vec_from_json(const Json& j) {
  require(j.is_array(), "vector: expected an array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), "vector: expected numeric entries");
    v((long)i) = j[i].get<double>();
  }
  return v;
}

}  // namespace

Json mat_to_json(const Mat& M) {
  Json rows = Json::array();
  for (long i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (long k = 0; k < M.cols(); ++k)
      row.push_back(finite(M(i, k), "mat_to_json"));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const Json& j) {
  const Json* rows = &j;
  if (j.is_object()) {
    require(j.contains("entries"), "matrix: object form needs \"entries\"");
    rows = &j.at("entries");
  }
  require(rows->is_array() && !rows->empty(), "matrix: expected rows");
  const std::size_t nr = rows->size();
  require((*rows)[0].is_array(), "matrix: expected nested arrays");
  const std::size_t nc = (*rows)[0].size();
  Mat M(nr, nc);
  for (std::size_t i = 0; i < nr; ++i) {
    require((*rows)[i].is_array() && (*rows)[i].size() == nc,
            "matrix: ragged rows");
    for (std::size_t k = 0; k < nc; ++k) {
      require((*rows)[i][k].is_number(), "matrix: expected numeric entries");
      M((long)i, (long)k) = (*rows)[i][k].get<double>();
    }
  }
  if (j.is_object() && j.contains("n"))
    require(j.at("n").get<long>() == (long)nr, "matrix: n disagrees with rows");
  return M;
}

Json dilation_to_json(const Dilation& d) {
  Json j;
  j["n"] = d.n();
  j["entries"] = mat_to_json(d.A);
  if (d.spectral.structured) {
    Json blocks = Json::array();
    for (const auto& b : d.spectral.blocks) {
      Json bj;
      bj["lambda_re"] = finite(b.lambda.real(), "dilation_to_json");
      bj["lambda_im"] = finite(b.lambda.imag(), "dilation_to_json");
      bj["order"] = b.order;
      blocks.push_back(std::move(bj));
    }
    j["blocks"] = std::move(blocks);
    if (d.spectral.has_basis())
      j["basis"] = mat_to_json(d.spectral.similarity_basis);
  }
  return j;
}

Dilation dilation_from_json(const Json& j) {
  if (j.is_array()) return make_dilation(mat_from_json(j));
  require(j.is_object(), "dilation: expected an array or object");
  Mat A = mat_from_json(j);
  if (!j.contains("blocks")) return make_dilation(A);
  std::vector<JordanBlock> blocks;
  for (const auto& bj : j.at("blocks")) {
    JordanBlock b;
    b.lambda = {bj.at("lambda_re").get<double>(),
                bj.at("lambda_im").get<double>()};
    b.order = bj.at("order").get<int>();
    b.complex_pair = b.lambda.imag() != 0.0;
    blocks.push_back(b);
  }
  Mat basis;
  if (j.contains("basis")) basis = mat_from_json(j.at("basis"));
  return make_dilation_structured(A, std::move(blocks), basis);
}

Json lattice_to_json(const Lattice& L) {
  Json j;
  j["basis"] = mat_to_json(L.basis);
  return j;
}

Lattice lattice_from_json(const Json& j) {
  if (j.is_array()) return make_lattice(mat_from_json(j));
  require(j.is_object() && j.contains("basis"), "lattice: needs \"basis\"");
  return make_lattice(mat_from_json(j.at("basis")));
}

namespace {

Json split_to_json(const SubspaceSplit& s) {
  Json j;
  j["e_basis"] = mat_to_json(s.E_basis);
  j["f_basis"] = mat_to_json(s.F_basis);
  j["c"] = mat_to_json(s.C);
  j["c_inv"] = mat_to_json(s.C_inv);
  j["projection"] = mat_to_json(s.projection);
  return j;
}

Mat mat_maybe_empty(const Json& j, int rows) {
  // an n x 0 factor serializes as n empty rows; accept [] as well
  if (j.is_array() && (j.empty() || (j[0].is_array() && j[0].empty())))
    return Mat(rows, 0);
  return mat_from_json(j);
}

SubspaceSplit split_from_json(const Json& j) {
  SubspaceSplit s;
  s.C = mat_from_json(j.at("c"));
  const int n = (int)s.C.rows();
  s.E_basis = mat_maybe_empty(j.at("e_basis"), n);
  s.F_basis = mat_maybe_empty(j.at("f_basis"), n);
  s.C_inv = mat_from_json(j.at("c_inv"));
  s.projection = mat_from_json(j.at("projection"));
  require(s.dim_E() + s.dim_F() == n, "qset: split dimensions disagree");
  return s;
}

}  // namespace

Json region_to_json(const Region& R) {
  require(R.valid(), "region_to_json: empty region handle");
  const Region::Node& nd = R.root();
  Json j;
  switch (nd.kind) {
    case Region::Kind::Ball:
      j["op"] = "ball";
      j["center"] = vec_to_json(nd.center);
      j["radius"] = finite(nd.radius, "region_to_json");
      break;
    case Region::Kind::Box:
      j["op"] = "box";
      j["lo"] = vec_to_json(nd.lo);
      j["hi"] = vec_to_json(nd.hi);
      break;
    case Region::Kind::Ellipsoid:
      j["op"] = "ellipsoid";
      j["m"] = mat_to_json(nd.M);
      j["level"] = finite(nd.level, "region_to_json");
      break;
    case Region::Kind::QSet:
      j["op"] = "qset";
      j["split"] = split_to_json(nd.split);
      j["p"] = finite(nd.p, "region_to_json");
      j["q"] = finite(nd.q, "region_to_json");
      j["s"] = finite(nd.s, "region_to_json");
      break;
    case Region::Kind::Image:
      j["op"] = "image";
      j["m"] = mat_to_json(nd.M);
      j["m_inv"] = mat_to_json(nd.M_inv);
      j["inner"] = region_to_json(Region(nd.a));
      break;
    case Region::Kind::Union:
    case Region::Kind::Intersect:
    case Region::Kind::Diff:
      j["op"] = nd.kind == Region::Kind::Union
                    ? "union"
                    : (nd.kind == Region::Kind::Intersect ? "intersect"
                                                          : "diff");
      j["a"] = region_to_json(Region(nd.a));
      j["b"] = region_to_json(Region(nd.b));
      break;
  }
  return j;
}

Region region_from_json(const Json& j) {
  require(j.is_object() && j.contains("op"), "region: needs \"op\"");
  const std::string op = j.at("op").get<std::string>();
  if (op == "ball")
    return ball(vec_from_json(j.at("center")), j.at("radius").get<double>());
  if (op == "box")
    return box_region(vec_from_json(j.at("lo")), vec_from_json(j.at("hi")));
  if (op == "ellipsoid")
    return ellipsoid_region(mat_from_json(j.at("m")),
                            j.at("level").get<double>());
  if (op == "qset")
    return qset(split_from_json(j.at("split")), j.at("p").get<double>(),
                j.at("q").get<double>(), j.at("s").get<double>());
  if (op == "image")
    return linear_image(mat_from_json(j.at("m")),
                        mat_from_json(j.at("m_inv")),
                        region_from_json(j.at("inner")));
  if (op == "union")
    return region_union(region_from_json(j.at("a")),
                        region_from_json(j.at("b")));
  if (op == "intersect")
    return region_intersect(region_from_json(j.at("a")),
                            region_from_json(j.at("b")));
  if (op == "diff")
    return region_diff(region_from_json(j.at("a")),
                       region_from_json(j.at("b")));
  throw Error("region: unknown op \"" + op + "\"");
}

Json freq_to_json(const FreqFunction& f) {
  Json j;
  Json terms = Json::array();
  for (const auto& t : f.terms) {
    Json tj;
    tj["coeff_re"] = finite(t.coeff.real(), "freq_to_json");
    tj["coeff_im"] = finite(t.coeff.imag(), "freq_to_json");
    tj["support"] = region_to_json(t.support);
    terms.push_back(std::move(tj));
  }
  j["terms"] = std::move(terms);
  j["disjoint"] = f.disjoint;
  return j;
}

FreqFunction freq_from_json(const Json& j) {
  require(j.is_object() && j.contains("terms"), "freq: needs \"terms\"");
  FreqFunction f;
  for (const auto& tj : j.at("terms")) {
    FreqTerm t;
    t.coeff = {tj.at("coeff_re").get<double>(), tj.at("coeff_im").get<double>()};
    t.support = region_from_json(tj.at("support"));
    f.terms.push_back(std::move(t));
  }
  f.disjoint = j.value("disjoint", false);
  return f;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "Zn",           "hex",     "sqrt2-norm",    "shear-golden",
      "rotation-jordan", "shannon", "dyadic-annulus"};
  return names;
}

Preset preset(const std::string& name, int n) {
  Preset p;
  p.name = name;
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  if (name == "Zn") {
    require(n >= 1 && n <= 8, "preset Zn: need 1 <= n <= 8");
    p.lattice = make_lattice(Mat::Identity(n, n));
    return p;
  }
  if (name == "hex") {
    Mat G(2, 2);
    G << 1, 0.5, 0, std::sqrt(3.0) / 2.0;
    p.lattice = make_lattice(G);
    return p;
  }
  if (name == "sqrt2-norm") {
    Mat G(2, 2);
    G << 1, std::sqrt(2.0), 1, -std::sqrt(2.0);
    p.lattice = make_lattice(G);
    return p;
  }
  if (name == "shear-golden") {
    auto [d, L] = shear_counterexample(golden);
    p.dilation = d;
    p.lattice = L;
    return p;
  }
  if (name == "rotation-jordan") {
    auto [d, L] = rotation_counterexample(1.0, golden);
    p.dilation = d;
    p.lattice = L;
    return p;
  }
  if (name == "shannon") {
    Mat two(1, 1);
    two << 2;
    p.dilation = make_dilation(two);
    p.lattice = make_lattice(Mat::Identity(1, 1));
    p.psi = shannon_msf();
    return p;
  }
  if (name == "dyadic-annulus") {
    require(n >= 1 && n <= 8, "preset dyadic-annulus: need 1 <= n <= 8");
    Dilation d = make_dilation(Mat::Identity(n, n) * 2);
    p.lattice = make_lattice(Mat::Identity(n, n));
    p.psi = freq_indicator(tiling_annulus(d));
    p.dilation = std::move(d);
    return p;
  }
  std::string msg = "unknown preset \"" + name + "\"; available:";
  for (const auto& s : preset_names()) msg += " " + s;
  throw Error(msg);
}

std::uint64_t stable_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out << text;
    out.flush();
    if (!out) throw Error("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("cannot move " + tmp + " into place");
  }
}

void write_report_atomic(const std::string& path, const Json& report) {
  write_text_atomic(path, report.dump(2) + "\n");
}

}  // namespace latscope
