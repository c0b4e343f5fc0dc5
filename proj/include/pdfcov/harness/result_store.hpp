/**
 * @file result_store.hpp
 * @brief Append-only on-disk store: records/<key>.json plus index.csv.
 */
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pdfcov/harness/scenario.hpp"
#include "pdfcov/metrics.hpp"

namespace pdfcov::harness {

struct Record {
  std::string key;
  std::string scenario_hash;
  std::string label;
  std::string estimator;
  json scenario;  ///< canonical config
  ScoreReport report;
  double mean_n = 0.0;  ///< mean observations per asset and path
  double mean_N = 0.0;
  double mean_M = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t master_seed = 0;
};

inline void to_json(json& j, const Record& r) {
  j = json{{"key", r.key},
           {"scenario_hash", r.scenario_hash},
           {"label", r.label},
           {"estimator", r.estimator},
           {"scenario", r.scenario},
           {"report", r.report},
           {"mean_n", r.mean_n},
           {"mean_N", r.mean_N},
           {"mean_M", r.mean_M},
           {"wall_time_s", r.wall_time_s},
           {"master_seed", r.master_seed}};
}

inline void from_json(const json& j, Record& r) {
  r.key = j.at("key").get<std::string>();
  r.scenario_hash = j.at("scenario_hash").get<std::string>();
  r.label = j.value("label", std::string());
  r.estimator = j.at("estimator").get<std::string>();
  r.scenario = j.value("scenario", json::object());
  r.report = j.at("report").get<ScoreReport>();
  r.mean_n = j.value("mean_n", 0.0);
  r.mean_N = j.value("mean_N", 0.0);
  r.mean_M = j.value("mean_M", 0.0);
  r.wall_time_s = j.value("wall_time_s", 0.0);
  r.master_seed = j.value("master_seed", std::uint64_t{0});
}

inline std::string record_key(const std::string& scenario_hash, const std::string& estimator_label) {
  return hex64(fnv1a64(scenario_hash + "|" + estimator_label));
}

class ResultStore {
 public:
  explicit ResultStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(records_dir(), ec);
    if (ec) throw InputError(dir_.string(), 0, "cannot create result store: " + ec.message());
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path records_dir() const { return dir_ / "records"; }
  std::filesystem::path index_path() const { return dir_ / "index.csv"; }
  std::filesystem::path record_path(const std::string& key) const { return records_dir() / (key + ".json"); }

  bool contains(const std::string& key) const { return std::filesystem::exists(record_path(key)); }

  std::optional<Record> load(const std::string& key) const {
    if (!contains(key)) return std::nullopt;
    return read_record(record_path(key));
  }

  /// Writes the record and appends an index row. Returns false (and writes
  /// nothing) if the key exists and force is off.
  bool put(const Record& r, bool force = false) {
    std::lock_guard lock(mutex_);
    if (contains(r.key) && !force) return false;
    const auto path = record_path(r.key);
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream os(tmp);
      if (!os) throw InputError(tmp, 0, "cannot write record");
      os << json(r).dump(2) << '\n';
      if (!os) throw InputError(tmp, 0, "write failed");
    }
    std::filesystem::rename(tmp, path);
    const bool fresh = !std::filesystem::exists(index_path());
    std::ofstream idx(index_path(), std::ios::app);
    if (!idx) throw InputError(index_path().string(), 0, "cannot append to index");
    if (fresh) idx << "key,scenario_hash,label,estimator,mise,mise_se,rmise,psd_rate,psd_path_rate,n_paths,wall_time_s\n";
    idx.precision(10);
    idx << r.key << ',' << r.scenario_hash << ",\"" << r.label << "\",\"" << r.estimator << "\"," << r.report.mise << ','
        << r.report.mise_se << ',' << r.report.rmise << ',' << r.report.psd_rate << ',' << r.report.psd_path_rate << ','
        << r.report.n_paths << ',' << r.wall_time_s << '\n';
    return true;
  }

  /// All records, ordered by key.
  std::vector<Record> all() const {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(records_dir()))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<Record> out;
    for (const auto& f : files) out.push_back(read_record(f));
    return out;
  }

 private:
  static Record read_record(const std::filesystem::path& p) {
    std::ifstream is(p);
    if (!is) throw InputError(p.string(), 0, "cannot read record");
    try {
      return json::parse(is).get<Record>();
    } catch (const json::exception& e) {
      throw InputError(p.string(), 0, std::string("malformed record: ") + e.what());
    }
  }

  std::filesystem::path dir_;
  std::mutex mutex_;
};

}  // namespace pdfcov::harness
