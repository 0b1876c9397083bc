#include "config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "memdiff/errors.hpp"

namespace memdiff::cli {

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& msg) {
  fail(ErrorCode::InvalidConfig, "config field " + path + ": " + msg);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) bad_field(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad_field(path, "must be finite");
  return v;
}

int as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad_field(path, "expected an integer");
  return j.get<int>();
}

// --- Expr <-> JSON -------------------------------------------------------

Expr parse_expr(const json& j, const std::string& path) {
  if (j.is_number()) return Expr::constant(j.get<double>());
  const json terms = j.is_object() ? json::array({j}) : j;
  if (!terms.is_array() || terms.empty())
    bad_field(path, "expected a number or a non-empty array of terms");
  Expr e;
  for (size_t k = 0; k < terms.size(); ++k) {
    const std::string tp = path + "[" + std::to_string(k) + "]";
    const json& t = terms[k];
    if (!t.is_object() || !t.contains("coeff"))
      bad_field(tp, "term must be an object with a coeff");
    Expr::Term term;
    term.coeff = as_number(t["coeff"], tp + ".coeff");
    if (t.contains("pow")) {
      term.pow = as_integer(t["pow"], tp + ".pow");
      if (term.pow < 0) bad_field(tp + ".pow", "must be >= 0");
    }
    for (const char* key : {"cos", "sin"}) {
      if (!t.contains(key)) continue;
      const json& arr = t[key];
      if (!arr.is_array()) bad_field(tp + "." + key, "expected an array");
      for (size_t i = 0; i < arr.size(); ++i) {
        const int kk = as_integer(arr[i], tp + "." + key);
        if (kk <= 0) bad_field(tp + "." + key, "wave numbers must be >= 1");
        (key[0] == 'c' ? term.cos_ks : term.sin_ks).push_back(kk);
      }
    }
    e.terms.push_back(std::move(term));
  }
  return e;
}

json expr_to_json(const Expr& e) {
  json arr = json::array();
  for (const Expr::Term& t : e.terms) {
    json jt;
    jt["coeff"] = t.coeff;
    jt["pow"] = t.pow;
    jt["cos"] = t.cos_ks;
    jt["sin"] = t.sin_ks;
    arr.push_back(jt);
  }
  return arr;
}

// --- model block ---------------------------------------------------------

ModelSpec build_model(json& mb, double L) {
  if (!mb.is_object()) bad_field("model", "expected an object");
  if (!mb.contains("builtin")) bad_field("model.builtin", "missing");
  const std::string builtin = mb["builtin"].get<std::string>();

  auto num = [&](const char* key, double def) {
    if (!mb.contains(key)) mb[key] = def;
    return as_number(mb[key], std::string("model.") + key);
  };
  const double r0 = num("r0", 0.0);
  const double r1 = num("r1", 0.0);
  const double d = num("d", 0.0);
  const double lambda = num("lambda", 1.0);
  const double sigma = num("sigma", 0.0);
  if (sigma < 0.0) bad_field("model.sigma", "must be >= 0");

  ModelSpec m;
  if (builtin == "logistic") {
    if (!mb.contains("m_hat")) bad_field("model.m_hat", "missing");
    const Expr m_hat = parse_expr(mb["m_hat"], "model.m_hat");
    mb["m_hat"] = expr_to_json(m_hat);
    m = make_logistic_heterogeneous(m_hat, L, r0, r1, d, lambda, sigma);
  } else if (builtin == "saturating") {
    if (!mb.contains("r_hat")) bad_field("model.r_hat", "missing");
    if (!mb.contains("gamma_hat")) bad_field("model.gamma_hat", "missing");
    const Expr r_hat = parse_expr(mb["r_hat"], "model.r_hat");
    const Expr gamma_hat = parse_expr(mb["gamma_hat"], "model.gamma_hat");
    mb["r_hat"] = expr_to_json(r_hat);
    mb["gamma_hat"] = expr_to_json(gamma_hat);
    const double k_hat = num("k_hat", 1.0);
    const double a_hat = num("a_hat", 0.3);
    if (k_hat <= 0.0) bad_field("model.k_hat", "must be > 0");
    m = make_saturating_bistable_boundary(r_hat, k_hat, gamma_hat, a_hat, L,
                                          r0, r1, d, lambda, sigma);
  } else {
    bad_field("model.builtin", "unknown builtin '" + builtin +
                                   "' (expected logistic or saturating)");
  }
  if (mb.contains("u_lo")) m.u_lo = as_number(mb["u_lo"], "model.u_lo");
  if (mb.contains("u_hi")) m.u_hi = as_number(mb["u_hi"], "model.u_hi");
  mb["u_lo"] = m.u_lo;
  mb["u_hi"] = m.u_hi;
  if (!(m.u_lo < m.u_hi)) bad_field("model.u_hi", "must exceed model.u_lo");
  return m;
}

void check_writable(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string probe = dir + "/.write_probe";
  std::ofstream f(probe);
  f << "ok";
  f.close();
  if (!f.good()) bad_field("output.dir", "not writable: " + dir);
  std::filesystem::remove(probe, ec);
}

}  // namespace

RunConfig load_config(const std::string& command,
                      const std::string& config_path,
                      const std::string& out_override, int threads) {
  std::ifstream in(config_path);
  if (!in.good())
    fail(ErrorCode::InvalidConfig, "config file not readable: " + config_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidConfig,
         std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, "config must be an object");

  RunConfig cfg;
  cfg.command = command;
  if (threads < 1) fail(ErrorCode::InvalidConfig, "--threads must be >= 1");
  cfg.threads = threads;

  if (j.contains("schema_version")) {
    const int v = as_integer(j["schema_version"], "schema_version");
    if (v != kSchemaVersion)
      bad_field("schema_version",
                "unsupported version " + std::to_string(v) + " (expected " +
                    std::to_string(kSchemaVersion) + ")");
  }
  j["schema_version"] = kSchemaVersion;

  // grid
  if (!j.contains("grid") || !j["grid"].is_object())
    bad_field("grid", "missing block");
  json& gb = j["grid"];
  if (!gb.contains("L")) gb["L"] = 1.0;
  if (!gb.contains("N")) gb["N"] = 256;
  cfg.L = as_number(gb["L"], "grid.L");
  cfg.N = as_integer(gb["N"], "grid.N");
  if (!(cfg.L > 0.0)) bad_field("grid.L", "must be > 0");
  if (cfg.N < 16) bad_field("grid.N", "must be >= 16");

  // solver
  if (!j.contains("solver")) j["solver"] = json::object();
  json& sb = j["solver"];
  if (!sb.is_object()) bad_field("solver", "expected an object");
  if (!sb.contains("newton_tol")) sb["newton_tol"] = 1e-11;
  if (!sb.contains("newton_max_iter")) sb["newton_max_iter"] = 50;
  cfg.newton_tol = as_number(sb["newton_tol"], "solver.newton_tol");
  cfg.newton_max_iter = as_integer(sb["newton_max_iter"], "solver.newton_max_iter");
  if (!(cfg.newton_tol > 0.0)) bad_field("solver.newton_tol", "must be > 0");
  if (cfg.newton_max_iter < 1) bad_field("solver.newton_max_iter", "must be >= 1");

  // model
  if (!j.contains("model")) bad_field("model", "missing block");
  cfg.model = build_model(j["model"], cfg.L);

  // task (validated by the command runners)
  if (!j.contains("task")) j["task"] = json::object();
  if (!j["task"].is_object()) bad_field("task", "expected an object");

  // output
  if (!j.contains("output")) j["output"] = json::object();
  json& ob = j["output"];
  if (!ob.is_object()) bad_field("output", "expected an object");
  if (!ob.contains("dir")) ob["dir"] = ".";
  if (!out_override.empty()) ob["dir"] = out_override;
  cfg.out_dir = ob["dir"].get<std::string>();
  check_writable(cfg.out_dir);

  j["command"] = command;
  j["threads"] = threads;
  cfg.resolved = std::move(j);
  return cfg;
}

// --- TaskReader ----------------------------------------------------------

double TaskReader::number(const std::string& key, double def) {
  if (!t_.contains(key)) t_[key] = def;
  return as_number(t_[key], "task." + key);
}

double TaskReader::required(const std::string& key) {
  if (!t_.contains(key)) bad_field("task." + key, "missing");
  return as_number(t_[key], "task." + key);
}

int TaskReader::integer(const std::string& key, int def) {
  if (!t_.contains(key)) t_[key] = def;
  return as_integer(t_[key], "task." + key);
}

std::string TaskReader::text(const std::string& key, const std::string& def) {
  if (!t_.contains(key)) t_[key] = def;
  if (!t_[key].is_string()) bad_field("task." + key, "expected a string");
  return t_[key].get<std::string>();
}

bool TaskReader::flag(const std::string& key, bool def) {
  if (!t_.contains(key)) t_[key] = def;
  if (!t_[key].is_boolean()) bad_field("task." + key, "expected a boolean");
  return t_[key].get<bool>();
}

// --- serializers ---------------------------------------------------------

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_number(row[i]);
    out << "\n";
  }
  write_text(path, out.str());
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  f.close();
  if (!f.good())
    fail(ErrorCode::InvalidConfig, "could not write output file: " + path);
}

void write_summary(const RunConfig& cfg, const json& results,
                   const std::vector<std::string>& outputs) {
  json s;
  s["schema_version"] = kSchemaVersion;
  s["command"] = cfg.command;
  s["config"] = cfg.resolved;
  s["config_hash"] = fnv1a_hex(cfg.resolved.dump());
  s["results"] = results;
  s["outputs"] = outputs;
  write_text(cfg.out_dir + "/summary.json", s.dump(2) + "\n");
}

}  // namespace memdiff::cli
