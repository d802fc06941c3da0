#include <complex>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "latscope/counting.hpp"
#include "latscope/dioph.hpp"
#include "latscope/errors.hpp"
#include "latscope/json_io.hpp"
#include "latscope/lattice.hpp"
#include "latscope/region.hpp"
#include "latscope/rng.hpp"
#include "latscope/spectral.hpp"
#include "latscope/version.hpp"
#include "latscope/wavelet.hpp"

using namespace latscope;

namespace {

// Flat {"radius": 2} applies at the invoked level; {"lic": {"radius": 2}}
// scopes to that subcommand. Arrays of primitives fan out one input per
// element, anything nested is handed over verbatim as a JSON string.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool,
                        std::string) const override {
    return "{}\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    Json j;
    try {
      input >> j;
    } catch (const std::exception& e) {
      throw CLI::FileError(std::string("config is not valid JSON: ") +
                           e.what());
    }
    std::vector<CLI::ConfigItem> out;
    walk(j, {}, out);
    return out;
  }

 private:
  static std::string scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  static void walk(const Json& j, std::vector<std::string> parents,
                   std::vector<CLI::ConfigItem>& out) {
    if (!j.is_object()) throw CLI::FileError("config root must be an object");
    for (const auto& [key, val] : j.items()) {
      if (val.is_object()) {
        auto deeper = parents;
        deeper.push_back(key);
        walk(val, deeper, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (val.is_array()) {
        bool flat = true;
        for (const auto& e : val)
          if (e.is_array() || e.is_object()) flat = false;
        if (flat)
          for (const auto& e : val) item.inputs.push_back(scalar(e));
        else
          item.inputs.push_back(val.dump());
      } else {
        item.inputs.push_back(scalar(val));
      }
      out.push_back(std::move(item));
    }
  }
};

Json parse_json(const std::string& s, const char* what) {
  try {
    return Json::parse(s);
  } catch (const std::exception& e) {
    throw Error(std::string(what) + ": bad JSON: " + e.what());
  }
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec vec_of(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(std::string(what) + ": expected an array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v((long)i) = j[i].get<double>();
  return v;
}

Vec vec_of(const std::vector<double>& xs) {
  Vec v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v((long)i) = xs[i];
  return v;
}

struct Inputs {
  std::string matrix;
  std::string lattice;
  std::string psi;
  std::string region;
  std::string preset_name;
  int preset_n = 2;
};

struct CommonOpts {
  std::string output = "-";
  std::string format;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::uint64_t resolved_seed = 0;
};

std::optional<Preset> maybe_preset(const Inputs& in) {
  if (in.preset_name.empty()) return std::nullopt;
  return preset(in.preset_name, in.preset_n);
}

Dilation resolve_dilation(const Inputs& in) {
  if (!in.matrix.empty())
    return dilation_from_json(parse_json(in.matrix, "--matrix"));
  if (auto p = maybe_preset(in)) {
    if (p->dilation) return *p->dilation;
    throw Error("preset \"" + in.preset_name + "\" carries no dilation");
  }
  throw Error("need --matrix or --preset");
}

Lattice resolve_lattice(const Inputs& in, int fallback_dim) {
  if (!in.lattice.empty())
    return lattice_from_json(parse_json(in.lattice, "--lattice"));
  if (auto p = maybe_preset(in)) {
    if (p->lattice) return *p->lattice;
  }
  if (fallback_dim > 0)
    return make_lattice(Mat::Identity(fallback_dim, fallback_dim));
  throw Error("need --lattice or --preset");
}

FreqFunction resolve_psi(const Inputs& in) {
  if (!in.psi.empty()) return freq_from_json(parse_json(in.psi, "--psi"));
  if (auto p = maybe_preset(in)) {
    if (p->psi) return *p->psi;
    throw Error("preset \"" + in.preset_name + "\" carries no generator");
  }
  throw Error("need --psi or --preset");
}

void echo_inputs(Json& cfg, const Inputs& in) {
  if (!in.matrix.empty()) cfg["matrix"] = in.matrix;
  if (!in.lattice.empty()) cfg["lattice"] = in.lattice;
  if (!in.psi.empty()) cfg["psi"] = in.psi;
  if (!in.region.empty()) cfg["region"] = in.region;
  if (!in.preset_name.empty()) {
    cfg["preset"] = in.preset_name;
    cfg["n"] = in.preset_n;
  }
}

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", (unsigned long long)h);
  return buf;
}

void emit(const CommonOpts& c, const std::string& sub, Json cfg,
          const Json& report, const std::string& csv_body = "") {
  cfg["subcommand"] = sub;
  cfg["seed"] = c.resolved_seed;
  cfg["threads"] = c.threads;
  cfg["format"] = c.format;
  if (c.output != "-") cfg["output"] = c.output;
  const std::string hash = hash_hex(stable_hash(cfg.dump()));

  std::string text;
  if (c.format == "csv") {
    text += "# latscope " + std::string(kVersion) + "\n";
    text += "# seed " + std::to_string(c.resolved_seed) + "\n";
    text += "# config_hash " + hash + "\n";
    text += "# config " + cfg.dump() + "\n";
    text += csv_body;
  } else {
    Json env;
    env["tool"] = "latscope";
    env["version"] = kVersion;
    env["seed"] = c.resolved_seed;
    env["config"] = std::move(cfg);
    env["config_hash"] = hash;
    env["report"] = report;
    text = env.dump(2) + "\n";
  }

  if (c.output == "-") {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text_atomic(c.output, text);
  }
}

// shared flag plumbing

void add_common(CLI::App* sub, CommonOpts& c, const char* default_format) {
  c.format = default_format;
  sub->fallthrough();
  sub->add_option("-o,--output", c.output, "file path, or - for stdout")
      ->capture_default_str();
  sub->add_option("--format", c.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  sub->add_option("--threads", c.threads, "worker cap")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  sub->add_option("--seed", c.seed,
                  "RNG seed; falls back to LATSCOPE_SEED, then 0");
}

void add_matrix_inputs(CLI::App* sub, Inputs& in) {
  sub->add_option("--matrix", in.matrix, "dilation as JSON rows");
  sub->add_option("--preset", in.preset_name, "named configuration");
  sub->add_option("-n,--dim", in.preset_n, "dimension for Zn-style presets")
      ->check(CLI::Range(1, 8));
}

void add_lattice_input(CLI::App* sub, Inputs& in) {
  sub->add_option("--lattice", in.lattice, "lattice as JSON {\"basis\": ...}");
}

void require_json_format(const CommonOpts& c) {
  if (c.format != "json")
    throw Error("this subcommand reports JSON only; drop --format csv");
}

void finish_seed(CommonOpts& c) {
  c.resolved_seed = resolve_seed(c.seed ? &*c.seed : nullptr, 0);
}

std::string row_flags(const ProfileRow& r) {
  std::string f;
  auto add = [&f](const char* tag) {
    if (!f.empty()) f += "|";
    f += tag;
  };
  if (r.overflow) add("overflow");
  if (r.skipped) add("skipped");
  if (r.tier > 1) add(r.tier == 2 ? "tier2" : "tier3");
  return f;
}

Json profile_json(const CountProfile& p) {
  Json rows = Json::array();
  for (const auto& r : p.rows) {
    Json row;
    row["j"] = r.j;
    row["count"] = r.count;
    row["ratio"] = r.ratio;
    row["overflow"] = r.overflow;
    row["skipped"] = r.skipped;
    row["tier"] = r.tier;
    if (!r.note.empty()) row["note"] = r.note;
    rows.push_back(std::move(row));
  }
  return rows;
}

Json verdict_json(const Verdict& v) {
  Json j;
  j["sup_ratio"] = v.sup_ratio;
  j["trend"] = to_string(v.trend);
  j["witness_j"] = v.witness_j;
  j["window"] = {v.window_min, v.window_max};
  j["evidence_only"] = v.evidence_only;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice counts, dilations and frequency-set diagnostics"};
  app.set_version_flag("--version", std::string(kVersion));
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values");
  app.require_subcommand(1);

  // classify
  {
    auto* sub = app.add_subcommand("classify", "spectral class of a matrix");
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto tol = std::make_shared<double>(1e-9);
    add_matrix_inputs(sub, *in);
    add_common(sub, *c, "json");
    sub->add_option("--tol", *tol, "modulus tolerance")->capture_default_str();
    sub->callback([in, c, tol] {
      finish_seed(*c);
      require_json_format(*c);
      Dilation d = resolve_dilation(*in);
      Json cfg;
      echo_inputs(cfg, *in);
      cfg["tol"] = *tol;
      Json rep;
      rep["class"] = to_string(classify_dilation(d, *tol));
      rep["det_abs"] = d.det_abs;
      Json eig = Json::array();
      for (const auto& l : d.spectral.eigenvalues)
        eig.push_back({{"re", l.real()}, {"im", l.imag()}});
      rep["eigenvalues"] = std::move(eig);
      Json blocks = Json::array();
      for (const auto& b : d.spectral.blocks)
        blocks.push_back({{"lambda_re", b.lambda.real()},
                          {"lambda_im", b.lambda.imag()},
                          {"order", b.order}});
      rep["blocks"] = std::move(blocks);
      emit(*c, "classify", cfg, rep);
    });
  }

  // count-profile
  {
    auto* sub = app.add_subcommand("count-profile",
                                   "lattice counts in dilated balls per j");
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto r = std::make_shared<double>(1.0);
    auto j_min = std::make_shared<long long>(-10);
    auto j_max = std::make_shared<long long>(10);
    auto gf = std::make_shared<double>(4.0);
    auto cap = std::make_shared<long long>(10'000'000);
    add_matrix_inputs(sub, *in);
    add_lattice_input(sub, *in);
    add_common(sub, *c, "csv");
    sub->add_option("-r,--radius", *r)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--j-min", *j_min)->capture_default_str();
    sub->add_option("--j-max", *j_max)->capture_default_str();
    sub->add_option("--growth-factor", *gf)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--cap", *cap)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->callback([in, c, r, j_min, j_max, gf, cap] {
      finish_seed(*c);
      Dilation A = resolve_dilation(*in);
      Lattice L = resolve_lattice(*in, A.n());
      if (*j_min > *j_max) throw Error("--j-min must not exceed --j-max");
      Json cfg;
      echo_inputs(cfg, *in);
      cfg["radius"] = *r;
      cfg["j_min"] = *j_min;
      cfg["j_max"] = *j_max;
      cfg["growth_factor"] = *gf;
      cfg["cap"] = *cap;
      CountProfile p =
          count_profile(A, L, *r, *j_min, *j_max, c->threads, {*cap});
      Json verdict;
      try {
        verdict = verdict_json(lce_verdict(p, *gf));
      } catch (const WindowTooSmall& e) {
        verdict = nullptr;
      }
      Json rep;
      rep["rows"] = profile_json(p);
      rep["verdict"] = verdict;
      std::string csv = "j,count,ratio,flags\n";
      for (const auto& row : p.rows)
        csv += std::to_string(row.j) + "," + std::to_string(row.count) + "," +
               Json(row.ratio).dump() + "," + row_flags(row) + "\n";
      csv += "# verdict " + verdict.dump() + "\n";
      emit(*c, "count-profile", cfg, rep, csv);
    });
  }

  // lce-check
  {
    auto* sub = app.add_subcommand(
        "lce-check", "boundedness verdict for the count profile");
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto r = std::make_shared<double>(1.0);
    auto j_min = std::make_shared<long long>(-15);
    auto j_max = std::make_shared<long long>(15);
    auto gf = std::make_shared<double>(4.0);
    auto cap = std::make_shared<long long>(10'000'000);
    add_matrix_inputs(sub, *in);
    add_lattice_input(sub, *in);
    add_common(sub, *c, "json");
    sub->add_option("-r,--radius", *r)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--j-min", *j_min)->capture_default_str();
    sub->add_option("--j-max", *j_max)->capture_default_str();
    sub->add_option("--growth-factor", *gf)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--cap", *cap)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->callback([in, c, r, j_min, j_max, gf, cap] {
      finish_seed(*c);
      require_json_format(*c);
      Dilation A = resolve_dilation(*in);
      Lattice L = resolve_lattice(*in, A.n());
      if (*j_min > *j_max) throw Error("--j-min must not exceed --j-max");
      Json cfg;
      echo_inputs(cfg, *in);
      cfg["radius"] = *r;
      cfg["j_min"] = *j_min;
      cfg["j_max"] = *j_max;
      cfg["growth_factor"] = *gf;
      cfg["cap"] = *cap;
      CountProfile p =
          count_profile(A, L, *r, *j_min, *j_max, c->threads, {*cap});
      Json rep = verdict_json(lce_verdict(p, *gf));
      rep["prediction"] = to_string(predict_lce(A));
      emit(*c, "lce-check", cfg, rep);
    });
  }

  // counterexample
  {
    auto* sub = app.add_subcommand(
        "counterexample", "engineered dilation/lattice pairs with growing counts");
    auto c = std::make_shared<CommonOpts>();
    auto family = std::make_shared<std::string>("shear");
    auto alpha = std::make_shared<double>((std::sqrt(5.0) - 1.0) / 2.0);
    auto theta = std::make_shared<double>(1.0);
    auto scale = std::make_shared<double>(2.0);
    add_common(sub, *c, "json");
    sub->add_option("--family", *family)
        ->check(CLI::IsMember({"shear", "rotation"}))
        ->capture_default_str();
    sub->add_option("--alpha", *alpha, "lattice line slope")
        ->capture_default_str();
    sub->add_option("--theta", *theta, "rotation angle")
        ->capture_default_str();
    sub->add_option("--scale", *scale, "expanding factor of the padded axis")
        ->capture_default_str();
    sub->callback([c, family, alpha, theta, scale] {
      finish_seed(*c);
      require_json_format(*c);
      Json cfg;
      cfg["family"] = *family;
      cfg["alpha"] = *alpha;
      cfg["theta"] = *theta;
      cfg["scale"] = *scale;
      auto [d, L] = *family == "shear"
                        ? shear_counterexample(*alpha, *scale)
                        : rotation_counterexample(*theta, *alpha);
      Json rep;
      rep["dilation"] = dilation_to_json(d);
      rep["lattice"] = lattice_to_json(L);
      rep["class"] = to_string(classify_dilation(d));
      emit(*c, "counterexample", cfg, rep);
    });
  }

  // nu-scan
  {
    auto* sub = app.add_subcommand(
        "nu-scan", "smallest coordinate-product modulus per radius");
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto rhos = std::make_shared<std::vector<double>>();
    auto pmat = std::make_shared<std::string>();
    auto umat = std::make_shared<std::string>();
    auto cap = std::make_shared<long long>(10'000'000);
    sub->add_option("--preset", in->preset_name, "named configuration");
    sub->add_option("-n,--dim", in->preset_n)->check(CLI::Range(1, 8));
    add_lattice_input(sub, *in);
    add_common(sub, *c, "json");
    sub->add_option("--rho", *rhos, "radii, comma separated")
        ->required()
        ->delimiter(',');
    sub->add_option("--p", *pmat, "basis-change matrix, JSON rows");
    sub->add_option("--u", *umat, "rotation, JSON rows");
    sub->add_option("--cap", *cap)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->callback([in, c, rhos, pmat, umat, cap] {
      finish_seed(*c);
      require_json_format(*c);
      Lattice L = resolve_lattice(*in, 0);
      Mat P = pmat->empty() ? Mat(Mat::Identity(L.n(), L.n()))
                            : mat_from_json(parse_json(*pmat, "--p"));
      Mat U;
      if (!umat->empty()) U = mat_from_json(parse_json(*umat, "--u"));
      Json cfg;
      echo_inputs(cfg, *in);
      cfg["rho"] = *rhos;
      if (!pmat->empty()) cfg["p"] = *pmat;
      if (!umat->empty()) cfg["u"] = *umat;
      cfg["cap"] = *cap;
      NuProfile prof =
          nu_scan(L, P, umat->empty() ? nullptr : &U, *rhos, {*cap});
      Json rows = Json::array();
      for (const auto& s : prof.samples)
        rows.push_back({{"rho", s.rho},
                        {"value", s.value},
                        {"witness", vec_json(s.witness)}});
      Json rep;
      rep["rows"] = std::move(rows);
      emit(*c, "nu-scan", cfg, rep);
    });
  }

  // skriganov-scan
  {
    auto* sub = app.add_subcommand(
        "skriganov-scan", "product-modulus decay against the slow-log bound");
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto rhos = std::make_shared<std::vector<double>>();
    auto eps = std::make_shared<double>(0.5);
    auto pmat = std::make_shared<std::string>();
    auto umat = std::make_shared<std::string>();
    auto cap = std::make_shared<long long>(10'000'000);
    sub->add_option("--preset", in->preset_name, "named configuration");
    sub->add_option("-n,--dim", in->preset_n)->check(CLI::Range(1, 8));
    add_lattice_input(sub, *in);
    add_common(sub, *c, "json");
    sub->add_option("--rho", *rhos)->required()->delimiter(',');
    sub->add_option("--epsilon", *eps)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--p", *pmat, "basis-change matrix, JSON rows");
    sub->add_option("--u", *umat, "rotation, JSON rows");
    sub->add_option("--cap", *cap)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->callback([in, c, rhos, eps, pmat, umat, cap] {
      finish_seed(*c);
      require_json_format(*c);
      Lattice L = resolve_lattice(*in, 0);
      Mat P = pmat->empty() ? Mat(Mat::Identity(L.n(), L.n()))
                            : mat_from_json(parse_json(*pmat, "--p"));
      Mat U = umat->empty() ? Mat(Mat::Identity(L.n(), L.n()))
                            : mat_from_json(parse_json(*umat, "--u"));
      Json cfg;
      echo_inputs(cfg, *in);
      cfg["rho"] = *rhos;
      cfg["epsilon"] = *eps;
      if (!pmat->empty()) cfg["p"] = *pmat;
      if (!umat->empty()) cfg["u"] = *umat;
      cfg["cap"] = *cap;
      auto rows = skriganov_scan(L, P, U, *rhos, *eps, {*cap});
      Json out = Json::array();
      int passes = 0;
      for (const auto& s : rows) {
        passes += s.pass ? 1 : 0;
        out.push_back({{"rho", s.rho},
                       {"nu", s.nu_value},
                       {"bound", s.bound},
                       {"pass", s.pass},
                       {"witness", vec_json(s.witness)}});
      }
      Json rep;
      rep["rows"] = std::move(out);
      rep["pass_count"] = passes;
      emit(*c, "skriganov-scan", cfg, rep);
    });
  }

  // ubiquity
  {
    auto* sub = app.add_subcommand(
        "ubiquity", "count boundedness across random rotations of a lattice");
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto r = std::make_shared<double>(1.0);
    auto trials = std::make_shared<int>(50);
    auto j_min = std::make_shared<long long>(-15);
    auto j_max = std::make_shared<long long>(15);
    auto force_id = std::make_shared<bool>(false);
    auto cap = std::make_shared<long long>(10'000'000);
    add_matrix_inputs(sub, *in);
    add_lattice_input(sub, *in);
    add_common(sub, *c, "json");
    sub->add_option("-r,--radius", *r)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--trials", *trials)->check(CLI::Range(1, 100000))
        ->capture_default_str();
    sub->add_option("--j-min", *j_min)->capture_default_str();
    sub->add_option("--j-max", *j_max)->capture_default_str();
    sub->add_flag("--force-identity", *force_id,
                  "pin the rotation to I instead of sampling");
    sub->add_option("--cap", *cap)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->callback([in, c, r, trials, j_min, j_max, force_id, cap] {
      finish_seed(*c);
      require_json_format(*c);
      Dilation A = resolve_dilation(*in);
      Lattice L = resolve_lattice(*in, A.n());
      Json cfg;
      echo_inputs(cfg, *in);
      cfg["radius"] = *r;
      cfg["trials"] = *trials;
      cfg["j_min"] = *j_min;
      cfg["j_max"] = *j_max;
      cfg["force_identity"] = *force_id;
      cfg["cap"] = *cap;
      ExperimentReport er =
          ubiquity_experiment(A, L, *r, *trials, *j_min, *j_max,
                              c->resolved_seed, c->threads, *force_id, {*cap});
      Json rows = Json::array();
      for (const auto& t : er.diagnostics) {
        Json row;
        row["index"] = t.index;
        row["pass"] = t.pass;
        row["errored"] = t.errored;
        if (!t.note.empty()) row["note"] = t.note;
        row["sup_ratio"] = t.sup_ratio;
        row["trend"] = to_string(t.trend);
        row["witness_j"] = t.witness_j;
        rows.push_back(std::move(row));
      }
      Json rep;
      rep["trials"] = er.trials;
      rep["pass_count"] = er.pass_count;
      rep["growth_factor"] = er.growth_factor;
      rep["rows"] = std::move(rows);
      emit(*c, "ubiquity", cfg, rep);
    });
  }

  // tiling
  {
    auto* sub = app.add_subcommand(
        "tiling", "single-cover rate of a set under integer dilation powers");
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto samples = std::make_shared<long long>(10'000);
    auto J = std::make_shared<int>(60);
    auto r_min = std::make_shared<double>(0.1);
    auto r_max = std::make_shared<double>(10.0);
    auto band = std::make_shared<double>(1e-9);
    add_matrix_inputs(sub, *in);
    add_common(sub, *c, "json");
    sub->add_option("--region", in->region,
                    "candidate set as region JSON; default is the Lyapunov "
                    "annulus of the dilation");
    sub->add_option("--samples", *samples)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("-J,--j-window", *J)->check(CLI::Range(1, 10000))
        ->capture_default_str();
    sub->add_option("--r-min", *r_min)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--r-max", *r_max)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--band", *band)->capture_default_str();
    sub->callback([in, c, samples, J, r_min, r_max, band] {
      finish_seed(*c);
      require_json_format(*c);
      Dilation B = resolve_dilation(*in);
      Region S = in->region.empty()
                     ? tiling_annulus(B)
                     : region_from_json(parse_json(in->region, "--region"));
      Json cfg;
      echo_inputs(cfg, *in);
      cfg["samples"] = *samples;
      cfg["j_window"] = *J;
      cfg["r_min"] = *r_min;
      cfg["r_max"] = *r_max;
      cfg["band"] = *band;
      TilingSampleSpec spec;
      spec.n_samples = *samples;
      spec.r_min = *r_min;
      spec.r_max = *r_max;
      spec.seed = c->resolved_seed;
      spec.threads = c->threads;
      spec.band = *band;
      TilingReport tr = tiling_check(B, S, spec, *J);
      Json rep;
      rep["single_cover_rate"] = tr.single_cover_rate;
      rep["samples"] = tr.samples;
      rep["multi_cover"] = tr.multi_cover_witnesses.size();
      rep["uncovered"] = tr.uncovered_witnesses.size();
      Json w = Json::array();
      for (std::size_t i = 0; i < tr.multi_cover_witnesses.size() && i < 5; ++i)
        w.push_back(vec_json(tr.multi_cover_witnesses[i]));
      rep["multi_cover_examples"] = std::move(w);
      Json u = Json::array();
      for (std::size_t i = 0; i < tr.uncovered_witnesses.size() && i < 5; ++i)
        u.push_back(vec_json(tr.uncovered_witnesses[i]));
      rep["uncovered_examples"] = std::move(u);
      emit(*c, "tiling", cfg, rep);
    });
  }

  // calderon
  {
    auto* sub = app.add_subcommand(
        "calderon", "orbit sums of |psi-hat|^2 at sampled frequencies");
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto J = std::make_shared<int>(30);
    auto count = std::make_shared<long long>(100);
    auto r_min = std::make_shared<double>(0.1);
    auto r_max = std::make_shared<double>(10.0);
    auto band = std::make_shared<double>(1e-9);
    auto tol_growth = std::make_shared<double>(1e-9);
    auto bound = std::make_shared<double>(0.0);
    auto has_bound = std::make_shared<bool>(false);
    add_matrix_inputs(sub, *in);
    add_common(sub, *c, "json");
    sub->add_option("--psi", in->psi, "generator as frequency-function JSON");
    sub->add_option("-J,--j-window", *J)->check(CLI::Range(0, 10000))
        ->capture_default_str();
    sub->add_option("--xi-count", *count)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--r-min", *r_min)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--r-max", *r_max)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--band", *band)->capture_default_str();
    sub->add_option("--tol-growth", *tol_growth)->capture_default_str();
    sub->add_option("--bound", *bound, "also list samples whose sum exceeds C")
        ->each([has_bound](const std::string&) { *has_bound = true; });
    sub->callback([in, c, J, count, r_min, r_max, band, tol_growth, bound,
                   has_bound] {
      finish_seed(*c);
      require_json_format(*c);
      FreqFunction psi = resolve_psi(*in);
      Dilation B = resolve_dilation(*in);
      Json cfg;
      echo_inputs(cfg, *in);
      cfg["j_window"] = *J;
      cfg["xi_count"] = *count;
      cfg["r_min"] = *r_min;
      cfg["r_max"] = *r_max;
      cfg["band"] = *band;
      cfg["tol_growth"] = *tol_growth;
      if (*has_bound) cfg["bound"] = *bound;
      auto xs = calderon_samples(psi, B, *count, *J, c->resolved_seed, *r_min,
                                 *r_max, *band);
      CalderonReport cal = calderon_sum(psi, B, xs, *J, *tol_growth);
      Json rows = Json::array();
      for (const auto& row : cal.rows)
        rows.push_back({{"xi", vec_json(row.xi)},
                        {"sum", row.sum},
                        {"half_sum", row.half_sum}});
      Json rep;
      rep["rows"] = std::move(rows);
      rep["growth_flag"] = cal.growth_flag;
      if (*has_bound) {
        auto viol = calderon_bound_check({psi}, B, xs, *J, *bound);
        Json vj = Json::array();
        for (const auto& v : viol)
          vj.push_back({{"xi", vec_json(v.xi)}, {"sum", v.sum}});
        rep["violations"] = std::move(vj);
      }
      emit(*c, "calderon", cfg, rep);
    });
  }

  // lic
  {
    auto* sub = app.add_subcommand(
        "lic", "truncated shift-orbit functional on a frequency box");
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto J = std::make_shared<int>(30);
    auto k_lat = std::make_shared<long long>(4096);
    auto samples = std::make_shared<long long>(20'000);
    auto f_lo = std::make_shared<std::vector<double>>();
    auto f_hi = std::make_shared<std::vector<double>>();
    auto sup_norm = std::make_shared<double>(1.0);
    add_matrix_inputs(sub, *in);
    add_lattice_input(sub, *in);
    add_common(sub, *c, "json");
    sub->add_option("--psi", in->psi, "generator as frequency-function JSON");
    sub->add_option("-J,--j-window", *J)->check(CLI::Range(0, 10000))
        ->capture_default_str();
    sub->add_option("--k-lat", *k_lat, "translation cap per level")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--samples", *samples)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--f-lo", *f_lo, "test box corner, comma separated")
        ->delimiter(',');
    sub->add_option("--f-hi", *f_hi, "test box corner, comma separated")
        ->delimiter(',');
    sub->add_option("--sup-norm", *sup_norm)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->callback([in, c, J, k_lat, samples, f_lo, f_hi, sup_norm] {
      finish_seed(*c);
      require_json_format(*c);
      FreqFunction psi = resolve_psi(*in);
      Dilation A = resolve_dilation(*in);
      Lattice G = resolve_lattice(*in, A.n());
      const int n = A.n();
      Vec lo = f_lo->empty() ? Vec(Vec::Constant(n, 0.3)) : vec_of(*f_lo);
      Vec hi = f_hi->empty() ? Vec(Vec::Constant(n, 0.4)) : vec_of(*f_hi);
      Json cfg;
      echo_inputs(cfg, *in);
      cfg["j_window"] = *J;
      cfg["k_lat"] = *k_lat;
      cfg["samples"] = *samples;
      cfg["f_lo"] = *f_lo;
      cfg["f_hi"] = *f_hi;
      cfg["sup_norm"] = *sup_norm;
      TestFunction f{box_region(lo, hi), *sup_norm};
      McOptions mo;
      mo.n_samples = *samples;
      mo.seed = c->resolved_seed;
      mo.threads = c->threads;
      LICReport lr = lic_functional({psi}, A, G, f, *J, *k_lat, mo);
      Json rep;
      Json cps = Json::array();
      for (const auto& [lvl, val] : lr.checkpoints)
        cps.push_back({{"level", lvl}, {"value", val}});
      rep["checkpoints"] = std::move(cps);
      rep["value"] = lr.value;
      rep["stderr"] = lr.stderr_;
      rep["divergence_evidence"] = lr.divergence_evidence;
      rep["orbit_hits"] = lr.K_orbit;
      rep["samples"] = lr.samples;
      rep["k_capped"] = lr.k_capped;
      rep["notes"] = lr.notes;
      emit(*c, "lic", cfg, rep);
    });
  }

  // lic-counterexample
  {
    auto* sub = app.add_subcommand(
        "lic-counterexample",
        "adversarial generator whose truncation diverges on one side");
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto r = std::make_shared<double>(0.0);
    auto side = std::make_shared<std::string>("neg");
    auto terms = std::make_shared<int>(3);
    auto limit = std::make_shared<long long>(400);
    auto cap = std::make_shared<long long>(10'000'000);
    auto run_J = std::make_shared<int>(0);
    auto samples = std::make_shared<long long>(10'000);
    auto k_lat = std::make_shared<long long>(100'000);
    add_matrix_inputs(sub, *in);
    add_lattice_input(sub, *in);
    add_common(sub, *c, "json");
    sub->add_option("-r,--radius", *r)->required()
        ->check(CLI::PositiveNumber);
    sub->add_option("--side", *side, "neg: j < 0 shells; pos: j >= 0 shells")
        ->check(CLI::IsMember({"neg", "pos"}))
        ->capture_default_str();
    sub->add_option("--terms", *terms)->check(CLI::Range(1, 64))
        ->capture_default_str();
    sub->add_option("--search-limit", *limit)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--cap", *cap)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--run-lic", *run_J,
                    "also evaluate the truncated functional to this level");
    sub->add_option("--samples", *samples)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--k-lat", *k_lat)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->callback([in, c, r, side, terms, limit, cap, run_J, samples, k_lat] {
      finish_seed(*c);
      require_json_format(*c);
      Dilation A = resolve_dilation(*in);
      Lattice G = resolve_lattice(*in, A.n());
      Json cfg;
      echo_inputs(cfg, *in);
      cfg["radius"] = *r;
      cfg["side"] = *side;
      cfg["terms"] = *terms;
      cfg["search_limit"] = *limit;
      cfg["cap"] = *cap;
      if (*run_J > 0) {
        cfg["run_lic"] = *run_J;
        cfg["samples"] = *samples;
        cfg["k_lat"] = *k_lat;
      }
      Dilation Bt = make_dilation(Mat(A.A.transpose()));
      Lattice Gd = dual(G);
      auto [psi, spec] = lic_counterexample_psi(
          Bt, Gd, *r, *side == "neg" ? LICSide::NegJ : LICSide::PosJ, *terms,
          *limit, {*cap});
      Json rep;
      rep["side"] = *side;
      rep["j"] = spec.j_i;
      rep["v"] = spec.v;
      rep["w"] = spec.w;
      rep["p"] = spec.p;
      rep["q"] = spec.q;
      rep["s"] = spec.s;
      rep["inv_sum"] = spec.inv_sum;
      rep["psi"] = freq_to_json(psi);
      if (*run_J > 0) {
        TestFunction f{spec.T, 1.0};
        McOptions mo;
        mo.n_samples = *samples;
        mo.seed = c->resolved_seed;
        LICReport lr = lic_functional({psi}, A, G, f, *run_J, *k_lat, mo);
        Json cps = Json::array();
        for (const auto& [lvl, val] : lr.checkpoints)
          cps.push_back({{"level", lvl}, {"value", val}});
        rep["lic"] = {{"checkpoints", std::move(cps)},
                      {"value", lr.value},
                      {"stderr", lr.stderr_},
                      {"divergence_evidence", lr.divergence_evidence},
                      {"orbit_hits", lr.K_orbit},
                      {"k_capped", lr.k_capped},
                      {"notes", lr.notes}};
      }
      emit(*c, "lic-counterexample", cfg, rep);
    });
  }

  // char-eq and dual-eq share a runner
  auto add_residual_cmd = [&app](const char* name, const char* help,
                                 bool dual) {
    auto* sub = app.add_subcommand(name, help);
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto phi_json = std::make_shared<std::string>();
    auto alphas_json = std::make_shared<std::string>();
    auto J = std::make_shared<int>(30);
    auto count = std::make_shared<long long>(100);
    auto r_min = std::make_shared<double>(0.1);
    auto r_max = std::make_shared<double>(10.0);
    auto band = std::make_shared<double>(1e-9);
    auto tol_mem = std::make_shared<double>(1e-9);
    add_matrix_inputs(sub, *in);
    add_lattice_input(sub, *in);
    add_common(sub, *c, "json");
    sub->add_option("--psi", in->psi, "generator as frequency-function JSON");
    if (dual)
      sub->add_option("--phi", *phi_json, "partner system, same JSON form")
          ->required();
    sub->add_option("--alpha", *alphas_json,
                    "JSON list of shift vectors; default 0 and unit shifts");
    sub->add_option("-J,--j-window", *J)->check(CLI::Range(0, 10000))
        ->capture_default_str();
    sub->add_option("--xi-count", *count)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--r-min", *r_min)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--r-max", *r_max)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--band", *band)->capture_default_str();
    sub->add_option("--tol-mem", *tol_mem)->capture_default_str();
    sub->callback([in, c, phi_json, alphas_json, J, count, r_min, r_max, band,
                   tol_mem, dual, name] {
      finish_seed(*c);
      require_json_format(*c);
      FreqFunction psi = resolve_psi(*in);
      Dilation A = resolve_dilation(*in);
      Lattice G = resolve_lattice(*in, A.n());
      const int n = A.n();
      std::vector<Vec> alphas;
      if (alphas_json->empty()) {
        alphas.push_back(Vec::Zero(n));
        for (int i = 0; i < n; ++i) {
          Vec e = Vec::Zero(n);
          e(i) = 1;
          alphas.push_back(e);
          alphas.push_back(-e);
        }
      } else {
        Json aj = parse_json(*alphas_json, "--alpha");
        if (!aj.is_array()) throw Error("--alpha: expected a list of vectors");
        for (const auto& a : aj) alphas.push_back(vec_of(a, "--alpha"));
      }
      Json cfg;
      echo_inputs(cfg, *in);
      if (dual) cfg["phi"] = *phi_json;
      if (!alphas_json->empty()) cfg["alpha"] = *alphas_json;
      cfg["j_window"] = *J;
      cfg["xi_count"] = *count;
      cfg["r_min"] = *r_min;
      cfg["r_max"] = *r_max;
      cfg["band"] = *band;
      cfg["tol_mem"] = *tol_mem;
      auto xs = calderon_samples(psi, A, *count, *J, c->resolved_seed, *r_min,
                                 *r_max, *band);
      ResidualReport rr;
      if (dual) {
        FreqFunction phi = freq_from_json(parse_json(*phi_json, "--phi"));
        rr = dual_eq_residual({psi}, {phi}, A, G, alphas, xs, *J, *tol_mem);
      } else {
        rr = char_eq_residual({psi}, A, G, alphas, xs, *J, *tol_mem);
      }
      Json rows = Json::array();
      for (const auto& row : rr.rows)
        rows.push_back({{"alpha", vec_json(row.alpha)},
                        {"xi", vec_json(row.xi)},
                        {"t_re", row.t.real()},
                        {"t_im", row.t.imag()},
                        {"residual", row.residual}});
      Json rep;
      rep["rows"] = std::move(rows);
      rep["max_residual_zero_alpha"] = rr.max_residual_zero_alpha;
      rep["max_residual_other"] = rr.max_residual_other;
      emit(*c, name, cfg, rep);
    });
  };
  add_residual_cmd("char-eq", "frame residuals of a system against itself",
                   false);
  add_residual_cmd("dual-eq", "mixed residuals of two systems", true);

  // msf-cert
  {
    auto* sub = app.add_subcommand(
        "msf-cert", "exponents certifying trivial dual intersection");
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto r = std::make_shared<double>(1.0);
    auto j_min = std::make_shared<long long>(-40);
    auto j_max = std::make_shared<long long>(0);
    auto is_dual = std::make_shared<bool>(false);
    auto cap = std::make_shared<long long>(10'000'000);
    add_matrix_inputs(sub, *in);
    add_lattice_input(sub, *in);
    add_common(sub, *c, "json");
    sub->add_option("-r,--radius", *r)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--j-min", *j_min)->capture_default_str();
    sub->add_option("--j-max", *j_max)->capture_default_str();
    sub->add_flag("--lattice-is-dual", *is_dual,
                  "take --lattice as the dual directly");
    sub->add_option("--cap", *cap)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->callback([in, c, r, j_min, j_max, is_dual, cap] {
      finish_seed(*c);
      require_json_format(*c);
      Dilation B = resolve_dilation(*in);
      Lattice L = resolve_lattice(*in, B.n());
      Lattice Gd = *is_dual ? L : dual(L);
      if (*j_min > *j_max) throw Error("--j-min must not exceed --j-max");
      Json cfg;
      echo_inputs(cfg, *in);
      cfg["radius"] = *r;
      cfg["j_min"] = *j_min;
      cfg["j_max"] = *j_max;
      cfg["lattice_is_dual"] = *is_dual;
      cfg["cap"] = *cap;
      MsfCertificate cert =
          msf_certificate(B, Gd, *r, *j_min, *j_max, {*cap});
      Json rep;
      rep["certifying_j"] = cert.certifying_j;
      rep["skipped_j"] = cert.skipped_j;
      rep["neg_count"] = cert.neg_count;
      rep["pos_count"] = cert.pos_count;
      rep["found"] = !cert.certifying_j.empty();
      emit(*c, "msf-cert", cfg, rep);
    });
  }

  // packing-check
  {
    auto* sub = app.add_subcommand(
        "packing-check", "volume sandwich for counts in a normed body");
    auto in = std::make_shared<Inputs>();
    auto c = std::make_shared<CommonOpts>();
    auto mjson = std::make_shared<std::string>();
    auto r = std::make_shared<double>(1.0);
    auto cap = std::make_shared<long long>(10'000'000);
    sub->add_option("--preset", in->preset_name, "named configuration");
    sub->add_option("-n,--dim", in->preset_n)->check(CLI::Range(1, 8));
    add_lattice_input(sub, *in);
    add_common(sub, *c, "json");
    sub->add_option("--m", *mjson, "norming matrix, JSON rows; default I");
    sub->add_option("-r,--radius", *r)->required()
        ->check(CLI::PositiveNumber);
    sub->add_option("--cap", *cap)->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->callback([in, c, mjson, r, cap] {
      finish_seed(*c);
      require_json_format(*c);
      Lattice L = resolve_lattice(*in, 0);
      Mat M = mjson->empty() ? Mat(Mat::Identity(L.n(), L.n()))
                             : mat_from_json(parse_json(*mjson, "--m"));
      Json cfg;
      echo_inputs(cfg, *in);
      if (!mjson->empty()) cfg["m"] = *mjson;
      cfg["radius"] = *r;
      cfg["cap"] = *cap;
      PackingReport pr = volume_packing_check(L, M, *r, {*cap});
      Json rep;
      rep["count"] = pr.count;
      rep["lower_bound"] = pr.lower_bound;
      rep["upper_bound"] = pr.upper_bound;
      rep["spanning"] = pr.spanning;
      rep["lower_ok"] = (double)pr.count >= pr.lower_bound - 1e-9;
      rep["upper_ok"] = !pr.spanning || (double)pr.count <= pr.upper_bound + 1e-9;
      emit(*c, "packing-check", cfg, rep);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Overflow& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const IllConditioned& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const SearchBudgetExceeded& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ConfluentSpectrum& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
