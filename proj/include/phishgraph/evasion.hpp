#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "phishgraph/detection.hpp"

namespace phishgraph {

/// M1 host, M2 path, M3 query, M4 host+path, M5 host+query, M6 path+query,
/// M7 all three.
enum class EvasionMethod { M1, M2, M3, M4, M5, M6, M7 };

std::string_view to_string(EvasionMethod method);
std::optional<EvasionMethod> parse_evasion_method(std::string_view text);

struct EvasionSpec {
  EvasionMethod method = EvasionMethod::M1;
  double ratio = 0.1;
  std::uint64_t seed = 1;
};

bool replaces_host(EvasionMethod m);
bool replaces_path(EvasionMethod m);
bool replaces_query(EvasionMethod m);

struct PartReplacement {
  UrlPart part;
  /// Absent when the evaded URL had no such part and the donor's was inserted.
  std::optional<std::string> original;
  std::string replacement;
  std::size_t donor_index;
  std::string donor_url;
};

struct EvasionEntry {
  std::size_t index;
  std::string original_url;
  std::string evaded_url;
  std::vector<PartReplacement> parts;
};

struct EvasionSkip {
  std::size_t index;
  std::string url;
  std::string reason;
};

struct EvasionLog {
  EvasionSpec spec;
  /// Where donors were drawn from; always every labelled-benign record.
  std::string donor_pool = "benign-corpus";
  std::size_t requested = 0;
  std::vector<EvasionEntry> entries;
  std::vector<EvasionSkip> skipped;
};

struct EvasionOutcome {
  std::vector<UrlRecord> records;
  EvasionLog log;
};

/// Rewrites ceil(ratio * |test_phishy|) of the records indexed by
/// `test_phishy` with parts of benign donors. A URL whose donor pool is
/// empty, or whose every candidate collides with an existing URL, is skipped
/// and logged. Throws Error(InvalidArgument) for ratios outside (0, 1] or
/// indices outside `records`.
EvasionOutcome apply_evasion(const std::vector<UrlRecord>& records,
                             const std::vector<std::size_t>& test_phishy, const EvasionSpec& spec);

/// Evades the phishing rows of `inputs.test`, drawing donors from benign
/// rows of both train and test.
std::pair<DetectionInputs, EvasionLog> evade_inputs(const DetectionInputs& inputs,
                                                    const EvasionSpec& spec);

/// Reruns the whole detection on an evaded corpus. Metrics cover every
/// labelled test URL, not only the evaded ones.
Metrics rebuild_and_evaluate(const DetectionInputs& modified, const DetectionConfig& config);

/// One JSON object per line: entries first, then skips.
void write_evasion_log(const EvasionLog& log, std::ostream& out);

}  // namespace phishgraph
