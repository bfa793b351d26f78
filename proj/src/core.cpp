#include "phishgraph/core.hpp"

namespace phishgraph {

std::string_view to_string(Label label) {
  return label == Label::Phishy ? "phishy" : "benign";
}

std::string_view to_string(TruthLabel label) {
  switch (label) {
    case TruthLabel::Phishy:
      return "phishy";
    case TruthLabel::Benign:
      return "benign";
    case TruthLabel::Unknown:
      break;
  }
  return "unknown";
}

std::optional<TruthLabel> parse_truth_label(std::string_view text) {
  if (text == "phishy") return TruthLabel::Phishy;
  if (text == "benign") return TruthLabel::Benign;
  if (text == "unknown" || text.empty()) return TruthLabel::Unknown;
  return std::nullopt;
}

std::optional<Label> to_label(TruthLabel truth) {
  switch (truth) {
    case TruthLabel::Phishy:
      return Label::Phishy;
    case TruthLabel::Benign:
      return Label::Benign;
    case TruthLabel::Unknown:
      break;
  }
  return std::nullopt;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return "InvalidArgument";
    case ErrorCode::MalformedUrl:
      return "MalformedUrl";
    case ErrorCode::DegenerateCorpus:
      return "DegenerateCorpus";
    case ErrorCode::MissingResource:
      return "MissingResource";
    case ErrorCode::MalformedRecord:
      return "MalformedRecord";
    case ErrorCode::EmptyGraph:
      return "EmptyGraph";
    case ErrorCode::InsufficientData:
      return "InsufficientData";
    case ErrorCode::MissingEmbedding:
      return "MissingEmbedding";
    case ErrorCode::NoObservedVertices:
      return "NoObservedVertices";
    case ErrorCode::UnknownVertex:
      return "UnknownVertex";
    case ErrorCode::EmptyTestSet:
      return "EmptyTestSet";
    case ErrorCode::NoDonor:
      return "NoDonor";
    case ErrorCode::Io:
      return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace phishgraph
