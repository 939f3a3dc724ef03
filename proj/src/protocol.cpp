#include "nrfar/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nrfar/errors.hpp"
#include "nrfar/rng.hpp"
#include "nrfar/textio.hpp"

namespace nrfar {

std::string NoiseCondition::id() const {
  if (snr.is_clean()) return source_name;
  std::ostringstream out;
  out << source_name << '@' << format_double(*snr.snr_db) << "dB";
  return out.str();
}

NoiseCondition clean_condition() { return {"clean", std::nullopt, SnrSpec::clean()}; }

std::vector<NoiseCondition> grid_conditions(const std::string& source_name,
                                            const NoiseSource& source) {
  std::vector<NoiseCondition> conditions;
  for (const double snr : SnrSpec::grid())
    conditions.push_back({source_name, source, SnrSpec::db(snr)});
  return conditions;
}

const CellResult* ProtocolResult::find(const std::string& method,
                                       const std::string& condition) const {
  for (const CellResult& c : cells)
    if (c.method == method && c.condition == condition) return &c;
  return nullptr;
}

ProtocolResult run_protocol(const Corpus& corpus, const FoldPlan& plan,
                            std::span<const MethodSpec> methods,
                            std::span<const NoiseCondition> conditions, int threads,
                            std::uint64_t seed) {
  if (methods.empty()) throw ConfigError("protocol: no methods");
  if (conditions.empty()) throw ConfigError("protocol: no conditions");
  const std::size_t n_rec = corpus.recordings.size();
  if (n_rec == 0) throw DataError("protocol: empty corpus");

  for (const MethodSpec& m : methods)
    if (m.fold_models.size() != plan.folds.size())
      throw ConfigError("protocol: method " + m.name + " lacks one model pair per fold");

  // Recording -> fold lookup.
  std::vector<int> fold_of(n_rec, -1);
  for (std::size_t f = 0; f < plan.folds.size(); ++f)
    for (const int r : plan.folds[f]) fold_of[static_cast<std::size_t>(r)] = static_cast<int>(f);
  for (std::size_t r = 0; r < n_rec; ++r)
    if (fold_of[r] < 0) throw ConfigError("protocol: recording missing from the fold plan");

  ProtocolResult result;
  for (const auto& rec : corpus.recordings) result.recording_names.push_back(rec.name);

  struct Job {
    std::size_t method, condition, recording;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < methods.size(); ++m)
    for (std::size_t c = 0; c < conditions.size(); ++c)
      for (std::size_t r = 0; r < n_rec; ++r) jobs.push_back({m, c, r});

  struct JobOut {
    double score = 0.0;
    ConfusionMatrix confusion{kNumActivities};
  };
  std::vector<JobOut> outputs(jobs.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;

  auto run_job = [&](const Job& job, JobOut& out) {
    const MethodSpec& method = methods[job.method];
    const NoiseCondition& cond = conditions[job.condition];
    const CorpusRecording& rec = corpus.recordings[job.recording];

    AudioSignal audio = read_wav(rec.wav_path);
    MixResult mixed;
    if (cond.snr.is_clean()) {
      mixed = mix_at_snr(audio, {}, SnrSpec::clean());
    } else {
      const auto noise_seed = derive_seed(seed, cond.id() + "/" + rec.name);
      const std::vector<double> noise =
          cond.source->generate(audio.samples.size(), noise_seed);
      mixed = mix_at_snr(audio, noise, cond.snr);
    }

    const RecognitionResult rr =
        recognize(method.pipeline,
                  method.fold_models[static_cast<std::size_t>(fold_of[job.recording])].models,
                  mixed.mixed);

    const FrameSeries truth = expand_frames(rec.truth_bouts, rec.duration_s);
    const FrameSeries pred = expand_frames(rr.bouts, rec.duration_s);
    out.score = balanced_accuracy(truth, pred);
    out.confusion = confusion(truth, pred);
  };

  auto worker = [&]() {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      try {
        run_job(jobs[j], outputs[j]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  // Sequential aggregation in (method, condition) order.
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t c = 0; c < conditions.size(); ++c) {
      CellResult cell;
      cell.method = methods[m].name;
      cell.condition = conditions[c].id();
      cell.source_name = conditions[c].source_name;
      cell.snr = conditions[c].snr;
      cell.per_recording.resize(n_rec);
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (jobs[j].method != m || jobs[j].condition != c) continue;
        cell.per_recording[jobs[j].recording] = outputs[j].score;
        for (int t = 0; t < kNumActivities; ++t)
          for (int q = 0; q < kNumActivities; ++q)
            cell.confusion_total.at(t, q) += outputs[j].confusion.at(t, q);
      }
      double sum = 0.0;
      for (const double s : cell.per_recording) sum += s;
      cell.mean = sum / static_cast<double>(n_rec);
      double sq = 0.0;
      for (const double s : cell.per_recording) sq += (s - cell.mean) * (s - cell.mean);
      cell.stddev = n_rec > 1 ? std::sqrt(sq / static_cast<double>(n_rec - 1)) : 0.0;
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

namespace {

std::vector<std::string> noisy_sources(const ProtocolResult& r) {
  std::vector<std::string> sources;
  for (const CellResult& c : r.cells) {
    if (c.snr.is_clean()) continue;
    if (std::find(sources.begin(), sources.end(), c.source_name) == sources.end())
      sources.push_back(c.source_name);
  }
  return sources;
}

std::vector<double> snr_rows(const ProtocolResult& r) {
  std::vector<double> snrs;
  for (const CellResult& c : r.cells) {
    if (c.snr.is_clean()) continue;
    if (std::find(snrs.begin(), snrs.end(), *c.snr.snr_db) == snrs.end())
      snrs.push_back(*c.snr.snr_db);
  }
  std::sort(snrs.begin(), snrs.end(), std::greater<double>());
  return snrs;
}

double safe_p(const std::vector<double>& a, const std::vector<double>& b) {
  try {
    return wilcoxon_signed_rank(a, b).p_value;
  } catch (const DataError&) {
    return std::numeric_limits<double>::quiet_NaN();  // identical scores
  }
}

}  // namespace

std::vector<WilcoxonTable> wilcoxon_tables(const ProtocolResult& result) {
  std::vector<std::string> methods;
  for (const CellResult& c : result.cells)
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
      methods.push_back(c.method);
  const auto sources = noisy_sources(result);
  const auto snrs = snr_rows(result);

  std::vector<WilcoxonTable> tables;
  auto build = [&](const std::string& title, auto&& cell_pair) {
    WilcoxonTable t;
    t.title = title;
    t.sources = sources;
    t.snrs_db = snrs;
    t.p.assign(snrs.size(), std::vector<double>(sources.size(),
                                                std::numeric_limits<double>::quiet_NaN()));
    for (std::size_t i = 0; i < snrs.size(); ++i)
      for (std::size_t j = 0; j < sources.size(); ++j) {
        const auto pair = cell_pair(sources[j], snrs[i]);
        if (pair.first != nullptr && pair.second != nullptr)
          t.p[i][j] = safe_p(pair.first->per_recording, pair.second->per_recording);
      }
    tables.push_back(std::move(t));
  };

  auto condition_id = [](const std::string& source, double snr) {
    return source + "@" + format_double(snr) + "dB";
  };

  if (methods.size() == 1) {
    // Noise robustness of the single method: noisy vs clean, paired by
    // recording.
    build(methods[0] + ": noisy vs clean",
          [&](const std::string& source, double snr) {
            return std::make_pair(result.find(methods[0], condition_id(source, snr)),
                                  result.find(methods[0], "clean"));
          });
  } else {
    for (std::size_t a = 0; a < methods.size(); ++a)
      for (std::size_t b = a + 1; b < methods.size(); ++b)
        build(methods[a] + " vs " + methods[b],
              [&](const std::string& source, double snr) {
                return std::make_pair(result.find(methods[a], condition_id(source, snr)),
                                      result.find(methods[b], condition_id(source, snr)));
              });
  }
  return tables;
}

std::string results_csv(const ProtocolResult& result, const std::string& provenance) {
  std::ostringstream out;
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << "method,source,snr_db,n,mean_balanced_accuracy,std_balanced_accuracy\n";
  for (const CellResult& c : result.cells) {
    out << c.method << ',' << c.source_name << ','
        << (c.snr.is_clean() ? "clean" : format_double(*c.snr.snr_db)) << ','
        << c.per_recording.size() << ',' << format_double(c.mean) << ','
        << format_double(c.stddev) << "\n";
  }
  return out.str();
}

std::string wilcoxon_csv(const WilcoxonTable& table, const std::string& provenance) {
  std::ostringstream out;
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << "# " << table.title << "\n";
  out << "snr_db";
  for (const auto& s : table.sources) out << ',' << s;
  out << "\n";
  for (std::size_t i = 0; i < table.snrs_db.size(); ++i) {
    out << format_double(table.snrs_db[i]);
    for (std::size_t j = 0; j < table.sources.size(); ++j) {
      out << ',';
      if (!std::isnan(table.p[i][j])) out << format_double(table.p[i][j]);
    }
    out << "\n";
  }
  return out.str();
}

std::string summary_json(const ProtocolResult& result,
                         const std::vector<WilcoxonTable>& tables,
                         const std::string& provenance) {
  nlohmann::ordered_json j;
  j["provenance"] = provenance;
  j["recordings"] = result.recording_names;
  j["cells"] = nlohmann::json::array();
  for (const CellResult& c : result.cells) {
    nlohmann::ordered_json cj;
    cj["method"] = c.method;
    cj["source"] = c.source_name;
    if (c.snr.is_clean())
      cj["snr_db"] = nullptr;
    else
      cj["snr_db"] = *c.snr.snr_db;
    cj["n"] = c.per_recording.size();
    cj["mean_balanced_accuracy"] = c.mean;
    cj["std_balanced_accuracy"] = c.stddev;
    cj["per_recording"] = c.per_recording;
    cj["confusion"] = c.confusion_total.counts;
    j["cells"].push_back(std::move(cj));
  }
  j["wilcoxon"] = nlohmann::json::array();
  for (const WilcoxonTable& t : tables) {
    nlohmann::ordered_json tj;
    tj["title"] = t.title;
    tj["sources"] = t.sources;
    tj["snrs_db"] = t.snrs_db;
    tj["p"] = nlohmann::ordered_json::array();
    for (const auto& row : t.p) {
      nlohmann::ordered_json rj = nlohmann::ordered_json::array();
      for (const double v : row) {
        if (std::isnan(v))
          rj.push_back(nullptr);
        else
          rj.push_back(v);
      }
      tj["p"].push_back(std::move(rj));
    }
    j["wilcoxon"].push_back(std::move(tj));
  }
  return j.dump(2) + "\n";
}

}  // namespace nrfar
