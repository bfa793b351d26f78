#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace phishgraph {

enum class Label { Phishy, Benign };

/// Ground truth as it appears in input files; Unknown rows are inferred, never observed.
enum class TruthLabel { Phishy, Benign, Unknown };

std::string_view to_string(Label label);
std::string_view to_string(TruthLabel label);
std::optional<TruthLabel> parse_truth_label(std::string_view text);
std::optional<Label> to_label(TruthLabel truth);

enum class ErrorCode {
  InvalidArgument,
  MalformedUrl,
  DegenerateCorpus,
  MissingResource,
  MalformedRecord,
  EmptyGraph,
  InsufficientData,
  MissingEmbedding,
  NoObservedVertices,
  UnknownVertex,
  EmptyTestSet,
  NoDonor,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// One input URL row.
struct UrlRecord {
  std::string url;
  TruthLabel label = TruthLabel::Unknown;
  std::optional<std::string> timestamp;

  friend bool operator==(const UrlRecord&, const UrlRecord&) = default;
};

}  // namespace phishgraph
