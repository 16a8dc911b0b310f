// Command-line front end: BICM simulation runs to CSV, golden vector export/check.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stsd/stsd.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitMismatch = 3;

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

bool parse_lemax(const std::string& text, double& out) {
  if (text == "inf" || text == "INF" || text == "Inf") {
    out = INFINITY;
    return true;
  }
  try {
    std::size_t used = 0;
    out = std::stod(text, &used);
    return used == text.size() && std::isfinite(out) && out > 0.0;
  } catch (const std::exception&) {
    return false;
  }
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunOptions {
  int mt = 0;
  int mr = 0;
  std::string mod = "16qam";
  std::vector<double> snr;
  int iters = 0;
  int frames = 0;
  std::string lemax = "inf";
  std::string enum_mode = "hybrid";
  std::string qrd = "sqrd";
  int kinfo = 0;
  std::uint64_t seed = 0;
  double fclk = 0.0;
  int max_errors = 0;
  int threads = 1;
  int spread = 0;
  std::string mapping;
  std::string out;
  double target_fer = 0.0;
  bool dry_run = false;
};

void write_csv(std::ostream& os, const stsd_sim_config& cfg, const RunOptions& o, const stsd_sim_result* res) {
  stsd_sim_info info{};
  stsd_sim_result_info(res, &info);

  os << "# stsd-csv v1\n";
  os << "# config: mt=" << cfg.mt << " mr=" << cfg.mr << " mod=" << o.mod << " q=" << cfg.bits_per_symbol
     << " iters=" << cfg.iterations << " frames=" << cfg.frames << " max_frame_errors=" << cfg.max_frame_errors
     << " lemax=" << num(cfg.l_e_max_normalized) << " enum=" << stsd_enum_mode_name(cfg.enum_mode)
     << " qrd=" << stsd_qrd_mode_name(cfg.qrd_mode) << " kinfo=" << cfg.k_info << " seed=" << cfg.seed
     << " fclk=" << num(cfg.f_clk) << " mapping=" << (o.mapping.empty() ? "gray" : o.mapping) << "\n";
  os << "# code: conv K=7 generators=(133,171) octal rate=" << num(info.code_rate)
     << " terminated=6 tail bits decoder=max-log BCJR\n";
  os << "# interleaver: s-random length=" << info.interleaver_length << " S=" << info.spread << "\n";
  os << "# framing: coded_bits=" << info.coded_bits << " pad_bits=" << info.pad_bits
     << " vectors_per_frame=" << info.vectors_per_frame << " pad=known zeros\n";
  os << "# snr: MT*Es/N0 dB; lemax: N0*L^E_max\n";
  os << "# generated: " << timestamp() << "\n";
  os << "snr_db,iteration,frames,frame_errors,fer,ber,mean_n_en,cumulative_n_en,theta_bps,"
        "l_e_max_normalized,enum_mode,seed\n";

  const std::size_t n = stsd_sim_result_row_count(res);
  std::vector<stsd_sim_row> rows(n);
  for (std::size_t k = 0; k < n; ++k) {
    stsd_sim_result_row(res, k, &rows[k]);
    const auto& r = rows[k];
    os << num(r.snr_db) << ',' << r.iteration << ',' << r.frames << ',' << r.frame_errors << ',' << num(r.fer)
       << ',' << num(r.ber) << ',' << num(r.mean_n_en) << ',' << num(r.cumulative_n_en) << ','
       << num(r.theta_bps) << ',' << num(cfg.l_e_max_normalized) << ',' << stsd_enum_mode_name(cfg.enum_mode)
       << ',' << cfg.seed << '\n';
  }

  if (o.target_fer > 0.0 && n > 0) {
    std::size_t count = 0;
    stsd_least_effort(rows.data(), n, o.target_fer, info.code_rate, cfg.bits_per_symbol, cfg.mt, cfg.f_clk,
                      nullptr, 0, &count);
    std::vector<stsd_schedule_entry> entries(count);
    stsd_least_effort(rows.data(), n, o.target_fer, info.code_rate, cfg.bits_per_symbol, cfg.mt, cfg.f_clk,
                      entries.data(), entries.size(), &count);
    os << "# schedule target_fer=" << num(o.target_fer) << "\n";
    for (const auto& e : entries) {
      os << "# schedule snr_db=" << num(e.snr_db) << " iterations=";
      if (e.iterations > 0)
        os << e.iterations << " cumulative_n_en=" << num(e.cumulative_n_en) << " theta_bps=" << num(e.theta_bps);
      else
        os << "unattained";
      os << "\n";
    }
  }
}

int run_simulation(const RunOptions& o) {
  stsd_sim_config cfg;
  stsd_sim_config_init(&cfg);
  cfg.mt = o.mt;
  cfg.mr = o.mr;
  if (o.mod == "qpsk") cfg.bits_per_symbol = 2;
  else if (o.mod == "16qam") cfg.bits_per_symbol = 4;
  else cfg.bits_per_symbol = 6;
  if (!o.snr.empty()) {
    cfg.snr_db = o.snr.data();
    cfg.snr_count = o.snr.size();
  }
  cfg.iterations = o.iters;
  cfg.frames = o.frames;
  if (!parse_lemax(o.lemax, cfg.l_e_max_normalized)) {
    std::cerr << "error: --lemax expects a positive number or 'inf'\n";
    return kExitUsage;
  }
  cfg.enum_mode = o.enum_mode == "hybrid" ? STSD_ENUM_HYBRID
                  : o.enum_mode == "se-sort" ? STSD_ENUM_SE_SORT
                                             : STSD_ENUM_CHANNEL_ONLY;
  cfg.qrd_mode = o.qrd == "qrd" ? STSD_QRD : STSD_SQRD;
  cfg.k_info = o.kinfo;
  cfg.seed = o.seed;
  cfg.f_clk = o.fclk;
  cfg.max_frame_errors = o.max_errors;
  cfg.threads = o.threads;
  cfg.spread = o.spread;
  cfg.mapping_path = o.mapping.empty() ? nullptr : o.mapping.c_str();

  if (o.dry_run) {
    std::cout << "mt=" << cfg.mt << " mr=" << cfg.mr << " q=" << cfg.bits_per_symbol << " qrd="
              << stsd_qrd_mode_name(cfg.qrd_mode) << " kinfo=" << cfg.k_info << " iters=" << cfg.iterations
              << " frames=" << cfg.frames << " lemax=" << num(cfg.l_e_max_normalized)
              << " enum=" << stsd_enum_mode_name(cfg.enum_mode) << " seed=" << cfg.seed << " snr=";
    for (std::size_t k = 0; k < cfg.snr_count; ++k) std::cout << (k ? "," : "") << num(cfg.snr_db[k]);
    std::cout << "\n";
    return kExitOk;
  }

  stsd_sim_result* res = nullptr;
  const stsd_status st = stsd_sim_run(&cfg, &res);
  if (st != STSD_OK) {
    std::cerr << "error: " << stsd_last_error() << "\n";
    return st == STSD_ERR_INVALID_ARGUMENT || st == STSD_ERR_UNSUPPORTED ? kExitUsage : kExitRuntime;
  }

  int code = kExitOk;
  if (o.out.empty() || o.out == "-") {
    write_csv(std::cout, cfg, o, res);
    std::cout.flush();
    if (!std::cout) code = kExitRuntime;
  } else {
    std::ofstream file(o.out, std::ios::binary);
    if (file) write_csv(file, cfg, o, res);
    file.close();
    if (!file) {
      std::cerr << "error: cannot write " << o.out << "\n";
      code = kExitRuntime;
    }
  }
  stsd_sim_result_destroy(res);
  return code;
}

int run_golden(const std::string& action, const std::string& path, const std::string& qrd) {
  if (action == "export") {
    const stsd_status st = stsd_golden_export(path.c_str(), qrd == "qrd" ? STSD_QRD : STSD_SQRD);
    if (st != STSD_OK) {
      std::cerr << "error: " << stsd_last_error() << "\n";
      return kExitRuntime;
    }
    std::cout << "wrote " << path << "\n";
    return kExitOk;
  }
  char report[1024];
  const stsd_status st = stsd_golden_check(path.c_str(), report, sizeof report);
  if (st == STSD_ERR_MISMATCH) {
    std::cerr << "golden mismatch: " << report << "\n";
    return kExitMismatch;
  }
  if (st != STSD_OK) {
    std::cerr << "error: " << report << "\n";
    return kExitRuntime;
  }
  std::cout << "golden ok: " << report << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SISO single tree-search sphere decoder: iterative BICM simulation"};
  app.set_version_flag("--version", std::string(stsd_version()));

  stsd_sim_config defaults;
  stsd_sim_config_init(&defaults);
  RunOptions o;
  o.mt = defaults.mt;
  o.mr = defaults.mr;
  o.iters = defaults.iterations;
  o.frames = defaults.frames;
  o.kinfo = defaults.k_info;
  o.seed = defaults.seed;
  o.fclk = defaults.f_clk;
  o.max_errors = defaults.max_frame_errors;
  o.threads = defaults.threads;
  o.snr.assign(defaults.snr_db, defaults.snr_db + defaults.snr_count);

  app.add_option("--mt", o.mt, "transmit antennas")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--mr", o.mr, "receive antennas")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--mod", o.mod, "modulation")
      ->capture_default_str()
      ->check(CLI::IsMember({"qpsk", "16qam", "64qam"}));
  app.add_option("--snr", o.snr, "SNR list in dB (MT*Es/N0), comma separated")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--iters", o.iters, "detector/decoder iterations")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--frames", o.frames, "frames per SNR point")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--lemax", o.lemax, "normalized clipping level N0*L^E_max, or inf")->capture_default_str();
  app.add_option("--enum", o.enum_mode, "enumeration mode")
      ->capture_default_str()
      ->check(CLI::IsMember({"hybrid", "se-sort", "channel-only"}));
  app.add_option("--qrd", o.qrd, "channel preprocessing")->capture_default_str()->check(CLI::IsMember({"qrd", "sqrd"}));
  app.add_option("--kinfo", o.kinfo, "information bits per frame")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "random seed")->capture_default_str();
  app.add_option("--fclk", o.fclk, "clock frequency in Hz for the throughput model")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "CSV output path (stdout when omitted)");
  app.add_option("--max-errors", o.max_errors, "stop a point after this many last-iteration frame errors (0 = never)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_option("--threads", o.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--spread", o.spread, "interleaver spread S (0 = default)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_option("--mapping", o.mapping, "custom mapping table file (index bitpattern re im)")
      ->check(CLI::ExistingFile);
  app.add_option("--target-fer", o.target_fer, "append a least-effort schedule for this FER target")
      ->check(CLI::Range(0.0, 1.0));
  app.add_flag("--dry-run", o.dry_run, "print the resolved configuration and exit");

  std::string golden_action;
  std::string golden_path;
  std::string golden_qrd = "sqrd";
  CLI::App* golden = app.add_subcommand("golden", "export or check detector golden vectors");
  golden->add_option("action", golden_action, "export | check")
      ->required()
      ->check(CLI::IsMember({"export", "check"}));
  golden->add_option("path", golden_path, "golden vector file")->required();
  golden->add_option("--qrd", golden_qrd, "preprocessing for exported vectors")
      ->capture_default_str()
      ->check(CLI::IsMember({"qrd", "sqrd"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  if (golden->parsed()) return run_golden(golden_action, golden_path, golden_qrd);
  return run_simulation(o);
}
