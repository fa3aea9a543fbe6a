#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "cli/kinds.hpp"

namespace fenchelkit::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kCertified = 0, kFailed = 1, kMalformed = 2 };

struct RunOptions {
  std::vector<fs::path> inputs;
  std::optional<fs::path> out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

/// What happened to one input file.
struct FileReport {
  fs::path input;
  fs::path output;  // empty when nothing was written
  int code = kCertified;
  std::string line;
};

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw SchemaError(p.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Write to a sibling temporary and rename it into place, so readers never
/// see a partial file.
inline void write_atomically(const fs::path& target, const std::string& text) {
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline fs::path default_output(const fs::path& input) {
  fs::path out = input;
  out.replace_extension();
  out += ".result.json";
  return out;
}

inline Tolerances read_tolerances(const Node& root) {
  Tolerances t;
  if (auto n = root.get("tolerances")) {
    auto positive = [](const Node& v) {
      const double x = v.number();
      if (!(x > 0.0)) v.fail("must be positive");
      return x;
    };
    if (n->has("lp")) t.lp = positive((*n)["lp"]);
    if (n->has("certificate")) t.certificate = positive((*n)["certificate"]);
    if (n->has("grid")) t.grid_factor = positive((*n)["grid"]);
  }
  return t;
}

/// Parse, solve and serialize one problem. Throws SchemaError on malformed
/// input; everything else ends up in the envelope.
inline std::pair<std::string, int> process(const std::string& text, std::optional<std::uint64_t> seed_override) {
  const auto start = std::chrono::steady_clock::now();
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Byte offset to line:column.
    const std::size_t at = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(at ? at - 1 : 0), '\n');
    throw SchemaError::at_line(static_cast<std::size_t>(line), "not valid JSON");
  }
  const Node root(doc, "");
  const std::string kind = root["kind"].str();
  const auto it = handlers().find(kind);
  if (it == handlers().end()) root["kind"].fail("unknown kind '" + kind + "'");
  Context ctx;
  ctx.tol = read_tolerances(root);
  if (root.has("seed")) ctx.seed = static_cast<std::uint64_t>(root["seed"].integer(0, 2147483647));
  if (seed_override) ctx.seed = *seed_override;

  Outcome o;
  try {
    o = it->second(root, ctx);
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    o = Outcome{};
    o.code = kFailed;
    o.status = "failed";
    o.message = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json env = Json::object();
  env["kind"] = kind;
  env["version"] = kVersion;
  env["status"] = o.status;
  env["message"] = o.message;
  env["seed"] = ctx.seed;
  env["tolerances"] = {{"lp", ctx.tol.lp}, {"certificate", ctx.tol.certificate}, {"grid", ctx.tol.grid_factor}};
  env["values"] = std::move(o.values);
  env["certificates"] = std::move(o.certificates);
  env["diagnostics"] = std::move(o.diagnostics);
  env["series"] = std::move(o.series);
  env["wall_time_s"] = wall;
  return {to_text(env), o.code};
}

inline FileReport run_one(const fs::path& input, const fs::path& output, std::optional<std::uint64_t> seed) {
  FileReport r{input, {}, kCertified, {}};
  try {
    auto [text, code] = process(read_file(input), seed);
    write_atomically(output, text);
    r.output = output;
    r.code = code;
    const Json doc = Json::parse(text);
    r.line = input.string() + ": " + doc["status"].get<std::string>();
    if (const auto msg = doc["message"].get<std::string>(); !msg.empty()) r.line += " (" + msg + ")";
  } catch (const SchemaError& e) {
    r.code = kMalformed;
    r.line = input.string() + ": malformed input: " + e.what();
  } catch (const std::exception& e) {
    r.code = kFailed;
    r.line = input.string() + ": " + e.what();
  }
  return r;
}

/// Process every input on `jobs` workers. Reports come back in input order
/// and the exit code is the worst one.
inline int run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> outputs;
  for (const auto& in : opt.inputs) {
    if (!opt.out) {
      outputs.push_back(default_output(in));
    } else if (opt.inputs.size() == 1 && !fs::is_directory(*opt.out)) {
      outputs.push_back(*opt.out);
    } else {
      fs::create_directories(*opt.out);
      outputs.push_back(*opt.out / default_output(in.filename()));
    }
  }
  std::vector<FileReport> reports(opt.inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < opt.inputs.size();) reports[k] = run_one(opt.inputs[k], outputs[k], opt.seed);
  };
  {
    std::vector<std::jthread> pool;
    const int n = std::clamp(opt.jobs, 1, static_cast<int>(std::max<std::size_t>(1, opt.inputs.size())));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  int code = kCertified;
  for (const auto& r : reports) {
    (r.code == kCertified ? out : err) << r.line << '\n';
    code = std::max(code, r.code);
  }
  return code;
}

/// Write one stored series of a result file as CSV.
inline int emit(const fs::path& result, const std::string& name, const std::optional<fs::path>& target,
                std::ostream& out, std::ostream& err) {
  Json doc;
  try {
    doc = Json::parse(read_file(result));
  } catch (const std::exception& e) {
    err << result.string() << ": malformed result: " << e.what() << '\n';
    return kMalformed;
  }
  if (!doc.contains("series") || !doc["series"].contains(name)) {
    err << result.string() << ": unknown series '" << name << "'\n";
    return kMalformed;
  }
  const Json& s = doc["series"][name];
  std::string csv;
  auto row = [&](const Json& cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) csv += ',';
      csv += csv_cell(c);
      first = false;
    }
    csv += '\n';
  };
  row(s["columns"]);
  for (const auto& r : s["rows"]) row(r);
  if (target) {
    write_atomically(*target, csv);
  } else {
    out << csv;
  }
  return kCertified;
}

}  // namespace fenchelkit::cli
