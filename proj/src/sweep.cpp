#include "sparsenet/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sparsenet/errors.hpp"

namespace sparsenet {

namespace {

constexpr std::string_view kSweepHeader = "strategy,rate,fine_tuned,accuracy,nnz,seed";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line_no, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError("sweep CSV line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

void SweepConfig::validate() const {
  if (rates.empty() || strategies.empty() || seeds.empty()) {
    throw ConfigError("sweep needs at least one rate, strategy and seed");
  }
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!std::isfinite(rates[i]) || rates[i] < 1.0) throw ConfigError("sweep rates must be >= 1");
    if (i > 0 && rates[i] < rates[i - 1]) throw ConfigError("sweep rates must be ascending");
  }
  if (fine_tune) ft_cfg.validate();
}

std::vector<SweepRecord> sweep(const Network& base, const Dataset& train, const Dataset& eval,
                               const SweepConfig& cfg) {
  cfg.validate();
  std::vector<SweepRecord> out;
  out.reserve(cfg.rates.size() * cfg.strategies.size() * cfg.seeds.size() * (cfg.fine_tune ? 2 : 1));
  for (const PruneStrategy strategy : cfg.strategies) {
    for (const double rate : cfg.rates) {
      for (const std::uint64_t seed : cfg.seeds) {
        Rng rng(seed);
        const PruneMask mask = prune(base, strategy, rate, rng);
        Network pruned = apply_mask(base, mask);
        out.push_back({strategy, rate, false, evaluate(pruned, eval), mask.kept(), seed});
        if (cfg.fine_tune) {
          TrainConfig ft = cfg.ft_cfg;
          ft.seed = seed;
          const TrainResult tuned = fine_tune(std::move(pruned), mask, train, ft);
          out.push_back({strategy, rate, true, evaluate(tuned.net, eval),
                         tuned.net.nonzero_weight_count(), seed});
        }
      }
    }
  }
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << kSweepHeader << '\n' << std::setprecision(17);
  for (const auto& r : records) {
    out << to_string(r.strategy) << ',' << r.rate << ',' << (r.fine_tuned ? 1 : 0) << ','
        << r.accuracy << ',' << r.nnz << ',' << r.seed << '\n';
  }
}

std::vector<SweepRecord> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) {
    throw FormatError("sweep CSV: missing or unexpected header");
  }
  std::vector<SweepRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) {
      throw FormatError("sweep CSV line " + std::to_string(line_no) + ": expected 6 fields");
    }
    SweepRecord r;
    try {
      r.strategy = parse_prune_strategy(f[0]);
    } catch (const ConfigError& e) {
      throw FormatError("sweep CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    r.rate = parse_number<double>(f[1], line_no, "rate");
    const int ft = parse_number<int>(f[2], line_no, "fine_tuned flag");
    if (ft != 0 && ft != 1) throw FormatError("sweep CSV line " + std::to_string(line_no) + ": fine_tuned must be 0 or 1");
    r.fine_tuned = ft == 1;
    r.accuracy = parse_number<double>(f[3], line_no, "accuracy");
    r.nnz = parse_number<std::size_t>(f[4], line_no, "nnz");
    r.seed = parse_number<std::uint64_t>(f[5], line_no, "seed");
    records.push_back(r);
  }
  return records;
}

}  // namespace sparsenet
