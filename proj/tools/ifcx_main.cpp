// ifcx: batch front end for interference-channel exponent computations.
//
// Subcommands: exponent-ordinary, exponent-hk, region, simulate,
// verify-lemmas. Configuration comes from one JSON document; a few scalar
// fields can be overridden from the command line. Output is CSV (default)
// or JSON, written atomically.

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ifcx/channels.hpp"
#include "ifcx/hk.hpp"
#include "ifcx/ordinary.hpp"
#include "ifcx/verification.hpp"

using nlohmann::json;

namespace {

constexpr const char* kVersion = "ifcx 0.1.0";

struct CliOverrides {
  std::string config_path;
  std::string out_path;
  int resolution = 0;       // 0 = keep config
  int threads = 0;
  std::int64_t seed = -1;   // -1 = keep config
  std::string format;
};

struct RunConfig {
  json doc;
  std::string raw;

  ifcx::GridSpec grid{4, false};
  int threads = 1;
  std::uint64_t seed = 1;
  std::string out_path = "out.csv";
  std::string format = "csv";
  double unit_scale = 1.0;  // bits -> nats conversion on ingestion
  bool t0_unconstrained_x2 = false;
  bool l_display_verbatim = false;
};

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt_double(double v) {
  if (v == std::numeric_limits<double>::infinity()) return "inf";
  if (v == -std::numeric_limits<double>::infinity()) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class OutputWriter {
 public:
  OutputWriter(std::string path, std::string format)
      : path_(std::move(path)), format_(std::move(format)) {}

  void meta(const std::string& key, const std::string& value) {
    meta_.emplace_back(key, value);
  }
  void columns(std::vector<std::string> cols) { columns_ = std::move(cols); }
  void row(const std::vector<std::string>& cells) { rows_.push_back(cells); }

  void write() {
    std::ostringstream out;
    if (format_ == "csv") {
      for (const auto& [k, v] : meta_) out << "# " << k << ": " << v << "\n";
      for (std::size_t i = 0; i < columns_.size(); ++i)
        out << (i ? "," : "") << columns_[i];
      out << "\n";
      for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << "\n";
      }
    } else {
      json j;
      for (const auto& [k, v] : meta_) j["meta"][k] = v;
      j["rows"] = json::array();
      for (const auto& r : rows_) {
        json jr;
        for (std::size_t i = 0; i < r.size(); ++i) jr[columns_[i]] = r[i];
        j["rows"].push_back(jr);
      }
      out << j.dump(2) << "\n";
    }
    const std::string tmp = path_ + ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary);
      if (!f) ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "cannot open output path");
      f << out.str();
    }
    if (std::rename(tmp.c_str(), path_.c_str()) != 0)
      ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "cannot move output into place");
  }

 private:
  std::string path_;
  std::string format_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

RunConfig load_config(const CliOverrides& cli) {
  RunConfig cfg;
  std::ifstream f(cli.config_path, std::ios::binary);
  if (!f) ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "cannot read config file");
  std::ostringstream ss;
  ss << f.rdbuf();
  cfg.raw = ss.str();
  cfg.doc = json::parse(cfg.raw);  // throws json::parse_error on bad input

  if (cfg.doc.contains("grid")) {
    const auto& g = cfg.doc["grid"];
    cfg.grid = ifcx::GridSpec(g.value("m", 4), g.value("refine", false));
  }
  cfg.threads = cfg.doc.value("threads", 1);
  if (cfg.doc.contains("simulation"))
    cfg.seed = cfg.doc["simulation"].value("seed", std::uint64_t{1});
  if (cfg.doc.contains("output")) {
    cfg.out_path = cfg.doc["output"].value("path", "out.csv");
    cfg.format = cfg.doc["output"].value("format", "csv");
  }
  if (cfg.doc.value("units", std::string("nats")) == std::string("bits"))
    cfg.unit_scale = std::log(2.0);
  cfg.t0_unconstrained_x2 = cfg.doc.value("t0_unconstrained_x2", false);
  cfg.l_display_verbatim = cfg.doc.value("l_display_verbatim", false);

  if (cli.resolution > 0) cfg.grid = ifcx::GridSpec(cli.resolution, cfg.grid.refine);
  if (cli.threads > 0) cfg.threads = cli.threads;
  if (cli.seed >= 0) cfg.seed = static_cast<std::uint64_t>(cli.seed);
  if (!cli.out_path.empty()) cfg.out_path = cli.out_path;
  if (!cli.format.empty()) cfg.format = cli.format;
  if (cfg.format != "csv" && cfg.format != "json")
    ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "format must be csv or json");
  if (cfg.threads < 1)
    ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "threads must be >= 1");
  return cfg;
}

ifcx::JointDist parse_pmf(const json& arr) {
  std::vector<double> p = arr.get<std::vector<double>>();
  const int n = static_cast<int>(p.size());
  return ifcx::JointDist({ifcx::Alphabet(n)}, std::move(p));
}

ifcx::Dmc2User parse_channel(const json& doc) {
  if (!doc.contains("channel"))
    ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "config lacks a channel section");
  const auto& ch = doc["channel"];
  const std::string type = ch.value("type", "");
  if (type == "zchannel") {
    return ifcx::make_z_channel(ch.at("p").get<double>());
  }
  if (type == "generic") {
    const auto sizes = ch.at("sizes").get<std::vector<int>>();
    if (sizes.size() != 4)
      ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "sizes must be [x1,x2,y1,y2]");
    const auto flat = ch.at("table").get<std::vector<double>>();
    const int nx1 = sizes[0], nx2 = sizes[1], ny1 = sizes[2], ny2 = sizes[3];
    if (flat.size() != static_cast<std::size_t>(nx1 * nx2 * ny1 * ny2))
      ifcx::fail(ifcx::ErrorCode::kDimensionMismatch, "channel table size mismatch");
    // Config tables are flattened row-major over (y1, y2, x1, x2); this
    // ordering is normative. Internal layout is (x1, x2, y1, y2).
    std::vector<double> table(flat.size());
    std::size_t idx = 0;
    for (int y1 = 0; y1 < ny1; ++y1)
      for (int y2 = 0; y2 < ny2; ++y2)
        for (int x1 = 0; x1 < nx1; ++x1)
          for (int x2 = 0; x2 < nx2; ++x2, ++idx) {
            const std::size_t row = static_cast<std::size_t>(x1) * nx2 + x2;
            table[row * static_cast<std::size_t>(ny1 * ny2) +
                  static_cast<std::size_t>(y1) * ny2 + y2] = flat[idx];
          }
    return ifcx::make_two_user_dmc(ifcx::Alphabet(nx1), ifcx::Alphabet(nx2),
                                   ifcx::Alphabet(ny1), ifcx::Alphabet(ny2),
                                   std::move(table));
  }
  ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "channel type must be zchannel or generic");
}

std::pair<ifcx::JointDist, ifcx::JointDist> parse_inputs(const json& doc) {
  if (!doc.contains("inputs"))
    ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "config lacks an inputs section");
  return {parse_pmf(doc["inputs"].at("p_x1")), parse_pmf(doc["inputs"].at("p_x2"))};
}

std::vector<double> parse_rate_axis(const json& spec, double scale) {
  std::vector<double> out;
  if (spec.is_number()) {
    out.push_back(spec.get<double>() * scale);
  } else if (spec.is_array()) {
    for (const auto& v : spec) out.push_back(v.get<double>() * scale);
  } else if (spec.is_object()) {
    const double start = spec.at("start").get<double>() * scale;
    const double stop = spec.at("stop").get<double>() * scale;
    const double step = spec.at("step").get<double>() * scale;
    if (step <= 0.0)
      ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "sweep step must be > 0");
    for (double v = start; v <= stop + 1e-12; v += step) out.push_back(v);
  } else {
    ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "bad rate specification");
  }
  for (double v : out)
    if (!(v >= 0.0) || !std::isfinite(v))
      ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "rates must be finite and >= 0");
  return out;
}

std::vector<ifcx::RatePair> parse_rate_pairs(const json& doc, double scale) {
  if (!doc.contains("rates"))
    ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "config lacks a rates section");
  const auto r1 = parse_rate_axis(doc["rates"].at("r1"), scale);
  const auto r2 = parse_rate_axis(doc["rates"].at("r2"), scale);
  std::vector<ifcx::RatePair> out;
  for (double a : r1)
    for (double b : r2) out.push_back(ifcx::RatePair(a, b));
  return out;
}

std::vector<ifcx::HkRates> parse_hk_rates(const json& doc, double scale) {
  if (!doc.contains("rates"))
    ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "config lacks a rates section");
  const auto& r = doc["rates"];
  const auto r11 = parse_rate_axis(r.at("r11"), scale);
  const auto r12 = parse_rate_axis(r.at("r12"), scale);
  const auto r21 = parse_rate_axis(r.at("r21"), scale);
  const auto r22 = parse_rate_axis(r.at("r22"), scale);
  std::vector<ifcx::HkRates> out;
  for (double a : r11)
    for (double b : r12)
      for (double c : r21)
        for (double d : r22) out.push_back(ifcx::HkRates(a, b, c, d));
  return out;
}

struct HkSetup {
  ifcx::VirtualChannel vch;
  std::vector<ifcx::JointDist> pz;
};

HkSetup parse_hk_setup(const json& doc) {
  if (!doc.contains("hk"))
    ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "config lacks an hk section");
  const auto& hk = doc["hk"];
  const auto zs = hk.at("z_sizes").get<std::vector<int>>();
  if (zs.size() != 4)
    ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "z_sizes must have four entries");
  ifcx::HkMaps maps{ifcx::Alphabet(zs[0]), ifcx::Alphabet(zs[1]), ifcx::Alphabet(zs[2]),
                    ifcx::Alphabet(zs[3]), hk.at("g1").get<std::vector<int>>(),
                    hk.at("g2").get<std::vector<int>>()};
  const auto dmc = parse_channel(doc);
  const auto w = ifcx::marginal_channel(dmc, 1);
  HkSetup setup{ifcx::make_hk_virtual_channel(w, maps), {}};
  for (const auto& p : hk.at("p_z")) setup.pz.push_back(parse_pmf(p));
  if (setup.pz.size() != 4)
    ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "p_z must list four pmfs");
  return setup;
}

void check_hk_rate_support(const HkSetup& setup, const std::vector<ifcx::HkRates>& rates) {
  const int sizes[4] = {setup.vch.maps.z11.size, setup.vch.maps.z12.size,
                        setup.vch.maps.z21.size, setup.vch.maps.z22.size};
  for (const auto& r : rates) {
    const double vals[4] = {r.r11, r.r12, r.r21, r.r22};
    for (int k = 0; k < 4; ++k)
      if (sizes[k] == 1 && vals[k] > 0.0)
        ifcx::fail(ifcx::ErrorCode::kInvalidArgument,
                   "positive rate on a singleton alphabet coordinate");
  }
}

void write_common_meta(OutputWriter& w, const RunConfig& cfg, double wall_ms) {
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64, fnv1a(cfg.raw));
  w.meta("version", kVersion);
  w.meta("config_hash", hash);
  w.meta("seed", std::to_string(cfg.seed));
  w.meta("grid_m", std::to_string(cfg.grid.m));
  w.meta("wall_time_ms", fmt_double(wall_ms));
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

int cmd_exponent_ordinary(const RunConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const auto dmc = parse_channel(cfg.doc);
  const auto [p1, p2] = parse_inputs(cfg.doc);
  const auto rates = parse_rate_pairs(cfg.doc, cfg.unit_scale);

  ifcx::ExponentOptions opts;
  opts.threads = cfg.threads;
  opts.t0_unconstrained_x2 = cfg.t0_unconstrained_x2;
  opts.l_display_verbatim = cfg.l_display_verbatim;
  const auto results = ifcx::exponent_ordinary_lattice(dmc, p1, p2, rates, cfg.grid, opts);
  const auto region = ifcx::region_ordinary(dmc, p1, p2);
  const double wall = ms_since(t_start);

  OutputWriter out(cfg.out_path, cfg.format);
  write_common_meta(out, cfg, wall);
  out.columns({"R1", "R2", "exponent", "region_member", "grid_m", "bracket_width",
               "wall_time_ms"});
  for (std::size_t i = 0; i < rates.size(); ++i) {
    out.row({fmt_double(rates[i].r1), fmt_double(rates[i].r2),
             fmt_double(results[i].value.value()),
             region.contains(rates[i]) ? "1" : "0",
             std::to_string(results[i].grid.m), fmt_double(results[i].bracket_width()),
             fmt_double(wall)});
  }
  out.write();
  return 0;
}

int cmd_exponent_hk(const RunConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const auto setup = parse_hk_setup(cfg.doc);
  const auto rates = parse_hk_rates(cfg.doc, cfg.unit_scale);
  check_hk_rate_support(setup, rates);

  ifcx::ExponentOptions opts;
  opts.threads = cfg.threads;
  opts.t0_unconstrained_x2 = cfg.t0_unconstrained_x2;
  opts.l_display_verbatim = cfg.l_display_verbatim;
  const auto results = ifcx::exponent_hk_lattice(setup.vch, setup.pz, rates, cfg.grid, opts);
  const auto region = ifcx::region_hk(setup.vch, setup.pz);
  const double wall = ms_since(t_start);

  OutputWriter out(cfg.out_path, cfg.format);
  write_common_meta(out, cfg, wall);
  std::vector<std::string> cols = {"R1", "R2", "R11", "R12", "R21", "R22", "exponent",
                                   "region_member", "grid_m", "bracket_width",
                                   "wall_time_ms"};
  for (int v = 1; v <= 7; ++v) cols.push_back("e_v" + std::to_string(v));
  out.columns(cols);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    std::vector<std::string> row = {
        fmt_double(rates[i].r1()), fmt_double(rates[i].r2()), fmt_double(rates[i].r11),
        fmt_double(rates[i].r12), fmt_double(rates[i].r21), fmt_double(rates[i].r22),
        fmt_double(results[i].value.value()), region.contains(rates[i]) ? "1" : "0",
        std::to_string(results[i].grid.m), fmt_double(results[i].bracket_width()),
        fmt_double(wall)};
    for (int v = 0; v < 7; ++v) {
      row.push_back(v < static_cast<int>(results[i].pattern_values.size())
                        ? fmt_double(results[i].pattern_values[static_cast<std::size_t>(v)])
                        : "inf");
    }
    out.row(row);
  }
  out.write();
  return 0;
}

int cmd_region(const RunConfig& cfg, const std::string& which) {
  const auto t_start = std::chrono::steady_clock::now();
  OutputWriter out(cfg.out_path, cfg.format);
  if (which == "ordinary") {
    const auto dmc = parse_channel(cfg.doc);
    const auto [p1, p2] = parse_inputs(cfg.doc);
    const auto region = ifcx::region_ordinary(dmc, p1, p2);
    write_common_meta(out, cfg, ms_since(t_start));
    out.meta("I_X1_Y1", fmt_double(region.i_x1_y1));
    out.meta("I_X1_Y1_given_X2", fmt_double(region.i_x1_y1_given_x2));
    out.meta("I_X1X2_Y1", fmt_double(region.i_x1x2_y1));
    out.columns({"R1", "R2", "member"});
    if (cfg.doc.contains("rates")) {
      for (const auto& r : parse_rate_pairs(cfg.doc, cfg.unit_scale))
        out.row({fmt_double(r.r1), fmt_double(r.r2), region.contains(r) ? "1" : "0"});
    }
    out.write();
    return 0;
  }
  if (which == "hk") {
    const auto setup = parse_hk_setup(cfg.doc);
    const auto region = ifcx::region_hk(setup.vch, setup.pz);
    write_common_meta(out, cfg, ms_since(t_start));
    static const char* names[7] = {"I_Z1",  "I_Z2",  "I_Z3", "I_Z1Z2",
                                   "I_Z1Z3", "I_Z2Z3", "I_Z1Z2Z3"};
    for (int u = 0; u < 7; ++u)
      out.meta(names[u], fmt_double(region.bounds[static_cast<std::size_t>(u)]));
    out.columns({"R11", "R12", "R21", "R22", "member"});
    if (cfg.doc.contains("rates")) {
      for (const auto& r : parse_hk_rates(cfg.doc, cfg.unit_scale))
        out.row({fmt_double(r.r11), fmt_double(r.r12), fmt_double(r.r21),
                 fmt_double(r.r22), region.contains(r) ? "1" : "0"});
    }
    out.write();
    return 0;
  }
  ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "region mode must be ordinary or hk");
}

int cmd_simulate(const RunConfig& cfg, const std::string& which) {
  const auto t_start = std::chrono::steady_clock::now();
  if (!cfg.doc.contains("simulation"))
    ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "config lacks a simulation section");
  const auto& sim = cfg.doc["simulation"];
  std::vector<int> n_list;
  if (sim.at("n").is_array())
    n_list = sim.at("n").get<std::vector<int>>();
  else
    n_list.push_back(sim.at("n").get<int>());
  const std::uint64_t trials = sim.at("trials").get<std::uint64_t>();

  ifcx::SimOptions opts;
  opts.threads = cfg.threads;

  OutputWriter out(cfg.out_path, cfg.format);
  std::vector<std::vector<std::string>> rows;
  if (which == "ordinary") {
    const auto dmc = parse_channel(cfg.doc);
    const auto [p1, p2] = parse_inputs(cfg.doc);
    const auto rates = parse_rate_pairs(cfg.doc, cfg.unit_scale);
    out.columns({"mode", "n", "R1", "R2", "trials", "pe_hat", "wilson_lo", "wilson_hi",
                 "ties", "exact_y", "seed", "wall_time_ms"});
    for (int n : n_list)
      for (const auto& r : rates) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto rep = ifcx::simulate_ordinary(dmc, p1, p2, r, n, trials, cfg.seed, opts);
        rows.push_back({"ordinary", std::to_string(n), fmt_double(r.r1),
                        fmt_double(r.r2), std::to_string(rep.trials),
                        fmt_double(rep.pe_hat), fmt_double(rep.wilson_lo),
                        fmt_double(rep.wilson_hi), std::to_string(rep.tie_events),
                        rep.exact_y ? "1" : "0", std::to_string(rep.seed),
                        fmt_double(ms_since(t0))});
      }
  } else if (which == "hk") {
    const auto setup = parse_hk_setup(cfg.doc);
    const auto rates = parse_hk_rates(cfg.doc, cfg.unit_scale);
    check_hk_rate_support(setup, rates);
    out.columns({"mode", "n", "R11", "R12", "R21", "R22", "trials", "pe_hat",
                 "wilson_lo", "wilson_hi", "ties", "exact_y", "seed", "wall_time_ms"});
    for (int n : n_list)
      for (const auto& r : rates) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto rep = ifcx::simulate_hk(setup.vch, setup.pz,
                                           ifcx::HkSimRates{r.r11, r.r12, r.r21, r.r22},
                                           n, trials, cfg.seed, opts);
        rows.push_back({"hk", std::to_string(n), fmt_double(r.r11), fmt_double(r.r12),
                        fmt_double(r.r21), fmt_double(r.r22), std::to_string(rep.trials),
                        fmt_double(rep.pe_hat), fmt_double(rep.wilson_lo),
                        fmt_double(rep.wilson_hi), std::to_string(rep.tie_events),
                        rep.exact_y ? "1" : "0", std::to_string(rep.seed),
                        fmt_double(ms_since(t0))});
      }
  } else {
    ifcx::fail(ifcx::ErrorCode::kInvalidArgument, "simulate mode must be ordinary or hk");
  }
  write_common_meta(out, cfg, ms_since(t_start));
  for (const auto& r : rows) out.row(r);
  out.write();
  return 0;
}

// Randomized union-bound verification: the one-block sandwich, de Caen's
// bound, and the pairwise-independent truncated union bound.
int cmd_verify_lemmas(const RunConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const auto& v = cfg.doc.contains("verify") ? cfg.doc["verify"] : json::object();
  const int n_random = v.value("instances", 1000);
  const int n_structured = v.value("constancy_instances", 200);
  const int n_pairwise = v.value("pairwise_instances", 500);
  const std::uint64_t seed = cfg.seed;

  int upper_pass = 0, sandwich_pass = 0, sandwich_applicable = 0;
  int decaen_pass = 0, pairwise_pass = 0;

  for (int t = 0; t < n_random; ++t) {
    ifcx::Rng rng = ifcx::Rng::stream(seed, static_cast<std::uint64_t>(t));
    ifcx::LemmaInstance inst;
    const int k = 2 + rng.next_int(2);  // K in {2,3}
    for (int i = 0; i < k; ++i) inst.sizes.push_back(2 + rng.next_int(3));
    for (int i = 0; i < k; ++i) {
      std::vector<double> p(static_cast<std::size_t>(inst.sizes[static_cast<std::size_t>(i)]));
      double s = 0.0;
      for (auto& x : p) {
        x = 0.05 + rng.next_double();
        s += x;
      }
      for (auto& x : p) x /= s;
      inst.pmfs.push_back(std::move(p));
    }
    inst.l1 = 1 + rng.next_int(3);
    inst.l2 = 1 + rng.next_int(2);
    const int n_ev = 1 + rng.next_int(3);
    for (int l = 0; l < n_ev; ++l) {
      std::vector<std::uint8_t> a0(static_cast<std::size_t>(inst.sizes[0]));
      for (auto& b : a0) b = rng.next_double() < 0.5;
      inst.a0.push_back(std::move(a0));
      std::vector<std::vector<std::uint8_t>> al, gl;
      for (int kk = 1; kk < k; ++kk) {
        std::vector<std::uint8_t> ak(
            static_cast<std::size_t>(inst.sizes[0] * inst.sizes[static_cast<std::size_t>(kk)]));
        for (auto& b : ak) b = rng.next_double() < 0.6;
        al.push_back(std::move(ak));
        std::vector<std::uint8_t> gk(static_cast<std::size_t>(inst.sizes[static_cast<std::size_t>(kk)]));
        for (auto& b : gk) b = rng.next_double() < 0.7;
        gl.push_back(std::move(gk));
      }
      inst.a.push_back(std::move(al));
      inst.g.push_back(std::move(gl));
    }
    const double exact = ifcx::exact_union_probability(inst);
    const auto bounds = ifcx::lemma3_bounds(inst);
    if (exact <= bounds.upper + 1e-12) ++upper_pass;
    if (bounds.conditions_hold) {
      ++sandwich_applicable;
      if (bounds.lower <= exact + 1e-12) ++sandwich_pass;
    }
  }

  // Constancy-structured instances: full A/G tables so the conditional
  // probabilities are constant over each B set.
  for (int t = 0; t < n_structured; ++t) {
    ifcx::Rng rng = ifcx::Rng::stream(seed ^ 0xabcdefULL, static_cast<std::uint64_t>(t));
    ifcx::LemmaInstance inst;
    inst.sizes = {2 + rng.next_int(3), 2 + rng.next_int(3)};
    for (int i = 0; i < 2; ++i) {
      std::vector<double> p(static_cast<std::size_t>(inst.sizes[static_cast<std::size_t>(i)]),
                            1.0 / inst.sizes[static_cast<std::size_t>(i)]);
      inst.pmfs.push_back(std::move(p));
    }
    inst.l1 = 1 + rng.next_int(3);
    inst.l2 = 1 + rng.next_int(2);
    // One event row: A0 x (A = product set) with G full. Product structure
    // keeps the conditional union probability constant over members.
    std::vector<std::uint8_t> a0(static_cast<std::size_t>(inst.sizes[0]));
    std::vector<std::uint8_t> side(static_cast<std::size_t>(inst.sizes[1]));
    bool any0 = false, any1 = false;
    for (auto& b : a0) {
      b = rng.next_double() < 0.5;
      any0 |= b;
    }
    for (auto& b : side) {
      b = rng.next_double() < 0.5;
      any1 |= b;
    }
    if (!any0) a0[0] = 1;
    if (!any1) side[0] = 1;
    inst.a0.push_back(a0);
    std::vector<std::uint8_t> ak(static_cast<std::size_t>(inst.sizes[0] * inst.sizes[1]));
    for (int v1 = 0; v1 < inst.sizes[0]; ++v1)
      for (int v2 = 0; v2 < inst.sizes[1]; ++v2)
        ak[static_cast<std::size_t>(v1 * inst.sizes[1] + v2)] =
            a0[static_cast<std::size_t>(v1)] && side[static_cast<std::size_t>(v2)];
    inst.a.push_back({ak});
    inst.g.push_back({std::vector<std::uint8_t>(static_cast<std::size_t>(inst.sizes[1]), 1)});
    const double exact = ifcx::exact_union_probability(inst);
    const auto bounds = ifcx::lemma3_bounds(inst);
    ++sandwich_applicable;
    if (bounds.conditions_hold && bounds.lower <= exact + 1e-12 &&
        exact <= bounds.upper + 1e-12)
      ++sandwich_pass;
  }

  // de Caen against exact union probabilities over random event families.
  for (int t = 0; t < n_random; ++t) {
    ifcx::Rng rng = ifcx::Rng::stream(seed ^ 0x5eedULL, static_cast<std::uint64_t>(t));
    const int atoms = 4 + rng.next_int(12);
    std::vector<double> pmf(static_cast<std::size_t>(atoms));
    double s = 0.0;
    for (auto& x : pmf) {
      x = 0.02 + rng.next_double();
      s += x;
    }
    for (auto& x : pmf) x /= s;
    const int n_ev = 1 + rng.next_int(5);
    std::vector<std::vector<std::uint8_t>> events(static_cast<std::size_t>(n_ev));
    for (auto& e : events) {
      e.assign(static_cast<std::size_t>(atoms), 0);
      for (auto& b : e) b = rng.next_double() < 0.4;
    }
    double exact = 0.0;
    for (int a = 0; a < atoms; ++a) {
      bool in = false;
      for (const auto& e : events) in = in || e[static_cast<std::size_t>(a)];
      if (in) exact += pmf[static_cast<std::size_t>(a)];
    }
    const double lower = ifcx::decaen_lower_bound(events, pmf);
    if (lower <= exact + 1e-12) ++decaen_pass;
  }

  // Pairwise-independent families (lines over a prime field): the truncated
  // union bound sandwich 0.5 min{1, sum} <= P(union) <= min{1, sum}.
  for (int t = 0; t < n_pairwise; ++t) {
    ifcx::Rng rng = ifcx::Rng::stream(seed ^ 0xfeedULL, static_cast<std::uint64_t>(t));
    static const int primes[4] = {3, 5, 7, 11};
    const int q = primes[rng.next_int(4)];
    const int n_ev = 1 + rng.next_int(2 * q);
    // Events A_{a,b} = {(x,y): y = a x + b mod q} over uniform (x,y).
    std::vector<std::pair<int, int>> lines;
    while (static_cast<int>(lines.size()) < n_ev) {
      const int a = rng.next_int(q), b = rng.next_int(q);
      bool dup = false;
      for (const auto& l : lines) dup |= (l.first == a && l.second == b);
      if (!dup) lines.emplace_back(a, b);
    }
    double p_union = 0.0;
    for (int x = 0; x < q; ++x)
      for (int y = 0; y < q; ++y) {
        bool in = false;
        for (const auto& [a, b] : lines)
          if ((a * x + b) % q == y) in = true;
        if (in) p_union += 1.0 / double(q * q);
      }
    const double sum = double(n_ev) / double(q);
    const double ub = std::min(1.0, sum);
    if (0.5 * ub <= p_union + 1e-12 && p_union <= ub + 1e-12) ++pairwise_pass;
  }

  OutputWriter out(cfg.out_path, cfg.format);
  write_common_meta(out, cfg, ms_since(t_start));
  out.columns({"check", "instances", "passes"});
  out.row({"union_upper", std::to_string(n_random), std::to_string(upper_pass)});
  out.row({"union_sandwich", std::to_string(sandwich_applicable),
           std::to_string(sandwich_pass)});
  out.row({"decaen", std::to_string(n_random), std::to_string(decaen_pass)});
  out.row({"pairwise_truncated", std::to_string(n_pairwise),
           std::to_string(pairwise_pass)});
  out.write();

  const bool all = upper_pass == n_random && sandwich_pass == sandwich_applicable &&
                   decaen_pass == n_random && pairwise_pass == n_pairwise;
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact random-coding error exponents for the two-user interference channel"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  CliOverrides cli;
  app.add_option("--config", cli.config_path, "JSON config file")->required();
  app.add_option("--out", cli.out_path, "output path override");
  app.add_option("--resolution", cli.resolution, "grid resolution override");
  app.add_option("--threads", cli.threads, "worker threads override");
  app.add_option("--seed", cli.seed, "RNG seed override");
  app.add_option("--format", cli.format, "csv or json");

  auto* sub_ord = app.add_subcommand("exponent-ordinary", "Exact exponent, ordinary ensemble");
  auto* sub_hk = app.add_subcommand("exponent-hk", "Exponent for the Han-Kobayashi ensemble");
  auto* sub_region = app.add_subcommand("region", "Achievable-rate region constants");
  std::string region_mode = "ordinary";
  sub_region->add_option("--mode", region_mode, "ordinary or hk");
  auto* sub_sim = app.add_subcommand("simulate", "Monte Carlo decoder simulation");
  std::string sim_mode = "ordinary";
  sub_sim->add_option("--mode", sim_mode, "ordinary or hk");
  auto* sub_verify = app.add_subcommand("verify-lemmas", "Union-bound lemma verification");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = load_config(cli);
    if (sub_ord->parsed()) return cmd_exponent_ordinary(cfg);
    if (sub_hk->parsed()) return cmd_exponent_hk(cfg);
    if (sub_region->parsed()) return cmd_region(cfg, region_mode);
    if (sub_sim->parsed()) return cmd_simulate(cfg, sim_mode);
    if (sub_verify->parsed()) return cmd_verify_lemmas(cfg);
  } catch (const ifcx::Error& e) {
    const bool guard = e.code() == ifcx::ErrorCode::kGuardExceeded ||
                       e.code() == ifcx::ErrorCode::kSpaceTooLarge;
    std::fprintf(stderr, "error: %s\n", e.what());
    return guard ? 2 : 1;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
