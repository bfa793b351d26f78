#include "phishgraph/evasion.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include <json.hpp>

namespace phishgraph {

namespace {

constexpr std::string_view kMethodNames[] = {"m1", "m2", "m3", "m4", "m5", "m6", "m7"};

// Shuffled donor indices handed out without replacement; the order is
// reshuffled only once every donor has been used.
class DonorQueue {
 public:
  DonorQueue(std::vector<std::size_t> pool, std::mt19937_64& rng) : pool_(std::move(pool)), rng_(rng) {
    std::shuffle(pool_.begin(), pool_.end(), rng_);
  }

  bool empty() const { return pool_.empty(); }
  std::size_t size() const { return pool_.size(); }

  std::size_t next() {
    if (cursor_ == pool_.size()) {
      std::shuffle(pool_.begin(), pool_.end(), rng_);
      cursor_ = 0;
    }
    return pool_[cursor_++];
  }

 private:
  std::vector<std::size_t> pool_;
  std::mt19937_64& rng_;
  std::size_t cursor_ = 0;
};

std::optional<UrlParts> try_parse(const std::string& url) {
  try {
    return parse_url(url);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MalformedUrl) throw;
    return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(EvasionMethod method) {
  return kMethodNames[static_cast<std::size_t>(method)];
}

std::optional<EvasionMethod> parse_evasion_method(std::string_view text) {
  const std::string lower = to_lower_ascii(text);
  for (std::size_t i = 0; i < std::size(kMethodNames); ++i) {
    if (lower == kMethodNames[i]) return static_cast<EvasionMethod>(i);
  }
  return std::nullopt;
}

bool replaces_host(EvasionMethod m) {
  return m == EvasionMethod::M1 || m == EvasionMethod::M4 || m == EvasionMethod::M5 ||
         m == EvasionMethod::M7;
}
bool replaces_path(EvasionMethod m) {
  return m == EvasionMethod::M2 || m == EvasionMethod::M4 || m == EvasionMethod::M6 ||
         m == EvasionMethod::M7;
}
bool replaces_query(EvasionMethod m) {
  return m == EvasionMethod::M3 || m == EvasionMethod::M5 || m == EvasionMethod::M6 ||
         m == EvasionMethod::M7;
}

EvasionOutcome apply_evasion(const std::vector<UrlRecord>& records,
                             const std::vector<std::size_t>& test_phishy, const EvasionSpec& spec) {
  if (!(spec.ratio > 0 && spec.ratio <= 1)) {
    throw Error(ErrorCode::InvalidArgument, "evasion ratio must lie in (0, 1]");
  }
  std::vector<std::size_t> candidates = test_phishy;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (!candidates.empty() && candidates.back() >= records.size()) {
    throw Error(ErrorCode::InvalidArgument, "evasion target index outside the corpus");
  }

  EvasionOutcome out{records, {}};
  out.log.spec = spec;
  const auto n = static_cast<double>(candidates.size());
  const auto count = std::min(candidates.size(),
                              static_cast<std::size_t>(std::ceil(spec.ratio * n - 1e-9)));
  out.log.requested = count;

  std::mt19937_64 rng(spec.seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(count);
  std::sort(candidates.begin(), candidates.end());

  std::vector<std::optional<UrlParts>> parsed(records.size());
  std::vector<std::size_t> host_pool, path_pool, query_pool;
  std::unordered_set<std::string> taken;
  for (std::size_t i = 0; i < records.size(); ++i) {
    parsed[i] = try_parse(records[i].url);
    if (!parsed[i]) continue;
    taken.insert(to_string(*parsed[i]));
    if (records[i].label != TruthLabel::Benign) continue;
    host_pool.push_back(i);
    if (!parsed[i]->path.empty() && parsed[i]->path != "/") path_pool.push_back(i);
    if (parsed[i]->query && !parsed[i]->query->empty()) query_pool.push_back(i);
  }
  DonorQueue hosts(std::move(host_pool), rng);
  DonorQueue paths(std::move(path_pool), rng);
  DonorQueue queries(std::move(query_pool), rng);

  struct Target {
    UrlPart part;
    DonorQueue* queue;
  };
  std::vector<Target> targets;
  if (replaces_host(spec.method)) targets.push_back({UrlPart::Host, &hosts});
  if (replaces_path(spec.method)) targets.push_back({UrlPart::Path, &paths});
  if (replaces_query(spec.method)) targets.push_back({UrlPart::Query, &queries});

  for (std::size_t index : candidates) {
    const UrlRecord& record = records[index];
    if (!parsed[index]) {
      out.log.skipped.push_back({index, record.url, "unparsable URL"});
      continue;
    }
    const auto empty_pool = std::find_if(targets.begin(), targets.end(),
                                         [](const Target& t) { return t.queue->empty(); });
    if (empty_pool != targets.end()) {
      out.log.skipped.push_back({index, record.url,
                                 "NoDonor: no benign URL with a " +
                                     std::string(to_string(empty_pool->part))});
      continue;
    }

    std::size_t attempts = 1;
    for (const auto& t : targets) attempts = std::max(attempts, t.queue->size());
    std::optional<EvasionEntry> entry;
    for (std::size_t attempt = 0; attempt < attempts && !entry; ++attempt) {
      UrlParts parts = *parsed[index];
      EvasionEntry candidate{index, record.url, {}, {}};
      for (const auto& t : targets) {
        const std::size_t donor = t.queue->next();
        const UrlParts& d = *parsed[donor];
        PartReplacement r{t.part, std::nullopt, {}, donor, records[donor].url};
        switch (t.part) {
          case UrlPart::Host:
            r.original = parts.host;
            r.replacement = d.host;
            parts.host = d.host;
            break;
          case UrlPart::Path:
            if (!parts.path.empty() && parts.path != "/") r.original = parts.path;
            r.replacement = d.path;
            parts.path = d.path;
            break;
          case UrlPart::Query:
            if (parts.query && !parts.query->empty()) r.original = parts.query;
            r.replacement = *d.query;
            parts.query = d.query;
            break;
          case UrlPart::UserInfo:
            break;
        }
        candidate.parts.push_back(std::move(r));
      }
      candidate.evaded_url = to_string(parts);
      if (!taken.contains(candidate.evaded_url)) entry = std::move(candidate);
    }
    if (!entry) {
      out.log.skipped.push_back({index, record.url, "every donor collides with an existing URL"});
      continue;
    }
    taken.insert(entry->evaded_url);
    out.records[index].url = entry->evaded_url;
    out.log.entries.push_back(std::move(*entry));
  }
  return out;
}

std::pair<DetectionInputs, EvasionLog> evade_inputs(const DetectionInputs& inputs,
                                                    const EvasionSpec& spec) {
  std::vector<UrlRecord> all = inputs.train;
  all.insert(all.end(), inputs.test.begin(), inputs.test.end());
  std::vector<std::size_t> phishy;
  for (std::size_t i = 0; i < inputs.test.size(); ++i) {
    if (inputs.test[i].label == TruthLabel::Phishy) phishy.push_back(inputs.train.size() + i);
  }
  auto outcome = apply_evasion(all, phishy, spec);
  DetectionInputs modified = inputs;
  std::copy(outcome.records.begin() + static_cast<std::ptrdiff_t>(inputs.train.size()),
            outcome.records.end(), modified.test.begin());
  return {std::move(modified), std::move(outcome.log)};
}

Metrics rebuild_and_evaluate(const DetectionInputs& modified, const DetectionConfig& config) {
  DetectionResult result = run_detection(modified, config);
  if (!result.metrics) throw Error(ErrorCode::EmptyTestSet, "no labelled test URL to evaluate");
  return *result.metrics;
}

void write_evasion_log(const EvasionLog& log, std::ostream& out) {
  using nlohmann::ordered_json;
  for (const auto& e : log.entries) {
    ordered_json row;
    row["index"] = e.index;
    row["method"] = to_string(log.spec.method);
    row["seed"] = log.spec.seed;
    row["donor_pool"] = log.donor_pool;
    row["original_url"] = e.original_url;
    row["evaded_url"] = e.evaded_url;
    ordered_json parts = ordered_json::array();
    for (const auto& p : e.parts) {
      ordered_json part;
      part["part"] = to_string(p.part);
      part["original"] = p.original ? ordered_json(*p.original) : ordered_json(nullptr);
      part["inserted"] = !p.original.has_value();
      part["replacement"] = p.replacement;
      part["donor_index"] = p.donor_index;
      part["donor_url"] = p.donor_url;
      parts.push_back(std::move(part));
    }
    row["parts"] = std::move(parts);
    out << row.dump() << '\n';
  }
  for (const auto& s : log.skipped) {
    ordered_json row;
    row["index"] = s.index;
    row["method"] = to_string(log.spec.method);
    row["skipped"] = true;
    row["url"] = s.url;
    row["reason"] = s.reason;
    out << row.dump() << '\n';
  }
}

}  // namespace phishgraph
