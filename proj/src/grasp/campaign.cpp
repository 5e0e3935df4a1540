#include <cmath>
#include <sstream>

#include "whisker/errors.hpp"
#include "whisker/format.hpp"
#include "whisker/grasp.hpp"
#include "whisker/parallel.hpp"

namespace whisker::grasp {

double CampaignReport::percent(std::size_t object, std::size_t config) const {
  return 100.0 * successes.at(object).at(config) / trials;
}

double CampaignReport::aggregate(std::size_t config) const {
  double sum = 0.0;
  for (std::size_t o = 0; o < objects.size(); ++o) sum += percent(o, config);
  return sum / static_cast<double>(objects.size());
}

CampaignReport run_campaign(std::span<const sim::RigidObject> objects,
                            std::span<const int> whisker_counts, int trials,
                            const GraspConfig& base, const SensorConfig& sensor,
                            std::uint64_t master_seed, int jobs) {
  if (trials < 1) throw ContractError("run_campaign: trials must be at least 1");
  if (objects.empty() || whisker_counts.empty())
    throw ContractError("run_campaign: need at least one object and one configuration");

  CampaignReport report;
  report.trials = trials;
  report.whisker_counts.assign(whisker_counts.begin(), whisker_counts.end());
  std::vector<GraspConfig> configs;
  for (int count : whisker_counts) {
    GraspConfig c = base;
    c.active = whisker_mask(count, sensor.geometry.n_whiskers);
    c.trials_per_object = trials;
    validate(c, sensor.geometry.n_whiskers);
    configs.push_back(c);
  }
  for (const auto& o : objects) report.objects.push_back(o.name);

  const std::size_t nc = configs.size(), nt = static_cast<std::size_t>(trials);
  report.outcomes.assign(objects.size(),
                         std::vector<std::vector<GraspOutcome>>(nc, std::vector<GraspOutcome>(nt)));
  parallel_for(objects.size() * nc * nt, jobs, [&](std::size_t i) {
    const std::size_t o = i / (nc * nt), c = (i / nt) % nc, t = i % nt;
    Rng rng(trial_seed(master_seed, objects[o].name, static_cast<int>(t)));
    report.outcomes[o][c][t] = run_grasp_trial(objects[o], configs[c], sensor, rng);
  });

  report.successes.assign(objects.size(), std::vector<int>(nc, 0));
  for (std::size_t o = 0; o < objects.size(); ++o)
    for (std::size_t c = 0; c < nc; ++c)
      for (const auto& r : report.outcomes[o][c]) report.successes[o][c] += r.success ? 1 : 0;
  return report;
}

double TraceStats::mean_sigma() const {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& row : sigma)
    for (double s : row) {
      sum += s;
      ++count;
    }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

TraceStats trace_stats(std::span<const GraspOutcome> outcomes) {
  if (outcomes.size() < 2) throw ContractError("trace_stats: need at least two trials");
  const auto& first = outcomes.front().trace;
  for (const auto& o : outcomes) {
    if (o.trace.size() != first.size())
      throw ContractError("trace_stats: traces differ in length");
    for (std::size_t f = 0; f < first.size(); ++f)
      if (o.trace[f].size() != first[f].size())
        throw ContractError("trace_stats: traces differ in whisker count");
  }
  TraceStats stats;
  stats.trials = outcomes.size();
  stats.phase_markers = outcomes.front().phase_markers;
  const double n = static_cast<double>(outcomes.size());
  for (std::size_t f = 0; f < first.size(); ++f) {
    const std::size_t w = first[f].size();
    std::vector<double> mean(w, 0.0), sigma(w, 0.0);
    for (std::size_t i = 0; i < w; ++i) {
      for (const auto& o : outcomes) mean[i] += o.trace[f][i];
      mean[i] /= n;
      double ss = 0.0;
      for (const auto& o : outcomes) {
        const double d = o.trace[f][i] - mean[i];
        ss += d * d;
      }
      sigma[i] = std::sqrt(ss / (n - 1.0));  // sample (n - 1) estimate
    }
    stats.mean.push_back(std::move(mean));
    stats.sigma.push_back(std::move(sigma));
  }
  return stats;
}

namespace {

const char* config_heading(int count) {
  switch (count) {
    case 8: return "Eight Whiskers";
    case 4: return "Four Whiskers";
    case 2: return "Two Whiskers";
    default: return nullptr;
  }
}

}  // namespace

std::string campaign_csv(const CampaignReport& report) {
  std::ostringstream os;
  os << "object";
  for (int count : report.whisker_counts) {
    const char* h = config_heading(count);
    os << ',' << (h != nullptr ? std::string(h) : std::to_string(count) + " whiskers");
  }
  os << '\n';
  for (std::size_t o = 0; o < report.objects.size(); ++o) {
    os << report.objects[o];
    for (std::size_t c = 0; c < report.whisker_counts.size(); ++c)
      os << ',' << format_double(report.percent(o, c));
    os << '\n';
  }
  os << "Total";
  for (std::size_t c = 0; c < report.whisker_counts.size(); ++c)
    os << ',' << format_double(report.aggregate(c));
  os << '\n';
  return os.str();
}

std::string traces_csv(const CampaignReport& report) {
  std::ostringstream os;
  os << "object,whiskers,trial,success,frame,whisker,displacement_mm\n";
  for (std::size_t o = 0; o < report.objects.size(); ++o)
    for (std::size_t c = 0; c < report.whisker_counts.size(); ++c)
      for (std::size_t t = 0; t < report.outcomes[o][c].size(); ++t) {
        const auto& r = report.outcomes[o][c][t];
        for (std::size_t f = 0; f < r.trace.size(); ++f)
          for (std::size_t w = 0; w < r.trace[f].size(); ++w)
            os << report.objects[o] << ',' << report.whisker_counts[c] << ',' << t << ','
               << (r.success ? 1 : 0) << ',' << f << ',' << w << ','
               << format_double(r.trace[f][w]) << '\n';
      }
  return os.str();
}

std::string stats_csv(const CampaignReport& report) {
  std::ostringstream os;
  os << "object,whiskers,frame,whisker,mean_mm,sigma_mm\n";
  for (std::size_t o = 0; o < report.objects.size(); ++o)
    for (std::size_t c = 0; c < report.whisker_counts.size(); ++c) {
      if (report.outcomes[o][c].size() < 2) continue;
      const TraceStats s = trace_stats(report.outcomes[o][c]);
      for (std::size_t f = 0; f < s.mean.size(); ++f)
        for (std::size_t w = 0; w < s.mean[f].size(); ++w)
          os << report.objects[o] << ',' << report.whisker_counts[c] << ',' << f << ',' << w
             << ',' << format_double(s.mean[f][w]) << ',' << format_double(s.sigma[f][w])
             << '\n';
    }
  return os.str();
}

nlohmann::json phase_markers_json(const CampaignReport& report) {
  nlohmann::json j = nlohmann::json::object();
  j["phases"] = {"retract", "lift", "release"};
  nlohmann::json markers = nlohmann::json::array();
  if (!report.outcomes.empty() && !report.outcomes[0].empty() &&
      !report.outcomes[0][0].empty()) {
    const auto& r = report.outcomes[0][0][0];
    for (int m : r.phase_markers) markers.push_back(m);
    j["frame_count"] = r.trace.size();
  }
  j["markers"] = markers;
  return j;
}

}  // namespace whisker::grasp
