#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "stripsurvey/config.hpp"
#include "stripsurvey/frame_io.hpp"
#include "stripsurvey/population.hpp"
#include "stripsurvey/report.hpp"
#include "stripsurvey/simlab.hpp"

namespace fs = std::filesystem;
using namespace stripsurvey;

namespace {

constexpr const char* kVersion = "1.0.0";

struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

int gen_pop(const std::string& spec_path, const std::string& out_path, std::uint64_t seed) {
  const std::string started = timestamp();
  CopulaSpec spec;
  try {
    spec = load_copula_spec(spec_path);
    validate_spec(spec);
  } catch (const std::exception& e) {
    throw ValidationFailure(e.what());
  }
  const PopulationFrame frame = generate_population(spec, seed);
  save_frame(frame, out_path);
  const auto truth = enumerate_truth(frame);

  Manifest m;
  m.set("command", "gen-pop");
  m.set("tool_version", kVersion);
  m.set("spec", spec_path);
  m.set("spec_digest", file_digest(spec_path));
  m.set("seed", std::to_string(seed));
  m.set("frame", out_path);
  m.set("frame_digest", file_digest(out_path));
  m.set("cells", std::to_string(frame.size()));
  m.set("strips", std::to_string(frame.strip_count()));
  m.set("strata", std::to_string(frame.stratum_count()));
  m.set("truth_total_mg", text::format_double(truth.total));
  m.set("truth_area_ha", text::format_double(truth.area));
  m.set("truth_density_mg_ha", text::format_double(truth.density));
  m.set("started", started);
  m.set("finished", timestamp());
  auto out = open_out(out_path + ".manifest");
  m.write(out);
  std::cout << "wrote " << out_path << " (" << frame.size() << " cells, " << frame.strip_count() << " strips)\n";
  return 0;
}

PopulationFrame load_frame_checked(const std::string& path) {
  try {
    return load_frame(path);
  } catch (const FrameError& e) {
    throw ValidationFailure(e.what());
  }
}

int truth(const std::string& frame_path) {
  const auto frame = load_frame_checked(frame_path);
  TruthValues t;
  try {
    t = enumerate_truth(frame);
  } catch (const FrameError& e) {
    throw ValidationFailure(e.what());
  }
  std::cout << "t = " << text::format_double(t.total / 1000.0) << " kt\n"
            << "A = " << text::format_double(t.area / 100.0) << " km^2\n"
            << "D = " << text::format_double(t.density) << " Mg/ha\n";
  return 0;
}

int simulate(const std::string& config_path, const std::string& frame_path, const std::string& out_dir, int jobs,
             const std::uint64_t* seed, bool dump) {
  const std::string started = timestamp();
  SimConfig cfg;
  try {
    cfg = load_sim_config(config_path);
  } catch (const ConfigError& e) {
    throw ValidationFailure(e.what());
  }
  if (seed) cfg.master_seed = *seed;
  const auto frame = load_frame_checked(frame_path);
  SimulationResult result;
  try {
    result = run(frame, cfg, jobs);
  } catch (const SimulationError& e) {
    throw ValidationFailure(e.what());
  } catch (const DesignError& e) {
    throw ValidationFailure(e.what());
  }

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  {
    auto out = open_out(dir / "summary.csv");
    write_summary_csv(result.summaries, out);
  }
  {
    auto out = open_out(dir / "summary.md");
    write_markdown(result.summaries, out);
    write_efficiency_markdown(result.summaries, out);
  }
  if (dump) {
    auto out = open_out(dir / "replicates.csv");
    write_replicate_log(result, cfg, out);
  }
  Manifest m;
  m.set("command", "simulate");
  m.set("tool_version", kVersion);
  m.set("config", config_path);
  m.set("config_digest", file_digest(config_path));
  m.set("frame", frame_path);
  m.set("frame_digest", file_digest(frame_path));
  m.set("master_seed", std::to_string(cfg.master_seed));
  m.set("replicates", std::to_string(cfg.replicates));
  m.set("designs", std::to_string(cfg.designs.size()));
  m.set("seed_rule", "replicate k of design d uses child_seed(master_seed, d, k)");
  m.set("jobs", std::to_string(jobs));
  m.set("summary_csv", (dir / "summary.csv").string());
  m.set("summary_md", (dir / "summary.md").string());
  if (dump) m.set("replicate_log", (dir / "replicates.csv").string());
  m.set("started", started);
  m.set("finished", timestamp());
  auto out = open_out(dir / "manifest.txt");
  m.write(out);
  std::cout << "wrote " << result.summaries.size() << " summary rows to " << (dir / "summary.csv").string()
            << '\n';
  return 0;
}

int report(const std::string& summary_path, const std::string& out_path) {
  std::ifstream in(summary_path, std::ios::binary);
  if (!in) throw ValidationFailure(summary_path + ": cannot open");
  std::vector<SimulationSummary> rows;
  try {
    rows = read_summary_csv(in);
  } catch (const ReportError& e) {
    throw ValidationFailure(e.what());
  }
  std::ostringstream md;
  write_markdown(rows, md);
  write_efficiency_markdown(rows, md);
  if (out_path.empty()) {
    std::cout << md.str();
  } else {
    auto out = open_out(out_path);
    out << md.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage strip-sampling estimators and Monte Carlo studies"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string spec_path, frame_out;
  std::uint64_t gen_seed = 42;
  auto* gen = app.add_subcommand("gen-pop", "Generate a synthetic population frame from a spec");
  gen->add_option("spec", spec_path, "Population spec (JSON)")->required();
  gen->add_option("--out,-o", frame_out, "Frame file to write")->required();
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();

  std::string truth_frame;
  auto* tr = app.add_subcommand("truth", "Print the population truth of a frame");
  tr->add_option("frame", truth_frame, "Frame file")->required();

  std::string sim_config, sim_frame, sim_out;
  int jobs = 1;
  std::uint64_t sim_seed = 0;
  bool dump = false;
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo study");
  sim->add_option("config", sim_config, "Simulation config (JSON)")->required();
  sim->add_option("frame", sim_frame, "Frame file")->required();
  sim->add_option("--out,-o", sim_out, "Output directory")->required();
  sim->add_option("--jobs,-j", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  auto* seed_opt = sim->add_option("--seed", sim_seed, "Override the config's master seed");
  sim->add_flag("--dump-replicates", dump, "Also write the per-replicate log");

  std::string summary_in, report_out;
  auto* rep = app.add_subcommand("report", "Render Markdown tables from a summary CSV");
  rep->add_option("summary", summary_in, "summary.csv from simulate")->required();
  rep->add_option("--out,-o", report_out, "Markdown file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return gen_pop(spec_path, frame_out, gen_seed);
    if (*tr) return truth(truth_frame);
    if (*sim) return simulate(sim_config, sim_frame, sim_out, jobs, *seed_opt ? &sim_seed : nullptr, dump);
    if (*rep) return report(summary_in, report_out);
  } catch (const ValidationFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
