#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace teamvec::corpus {

struct Utterance {
  std::string speaker_id;
  std::string text;
  size_t index = 0;  // 0-based position within the dialogue
  std::optional<std::string> da_tag;  // present only on pre-tagged input
};

/// Team-level process conflict z-score. Lower means less conflict, which
/// indicates a better-performing team.
struct ConflictScore {
  double process_conflict_z = 0.0;
};

enum class ConflictLabel { HighPerforming, LowPerforming };

enum class PhaseKind { Whole, Initial, Middle, End };

inline const char* to_string(PhaseKind p) {
  switch (p) {
    case PhaseKind::Whole: return "whole";
    case PhaseKind::Initial: return "initial";
    case PhaseKind::Middle: return "middle";
    case PhaseKind::End: return "end";
  }
  return "?";
}

constexpr std::array<PhaseKind, 4> kAllPhases = {
    PhaseKind::Whole, PhaseKind::Initial, PhaseKind::Middle, PhaseKind::End};

/// One dialogue: the ordered utterances of one team in one game session.
/// Immutable after load; safe to share across threads.
struct Transcript {
  std::string team_id;
  std::string session_id;
  std::vector<Utterance> utterances;
  std::optional<ConflictScore> outcome;

  size_t size() const { return utterances.size(); }
  std::vector<std::string> speakers() const;  // distinct ids, first-seen order
};

enum class FileFormat { Jsonl, Csv };

struct LoadOptions {
  bool allow_empty_text = false;
};

/// Reads transcripts from a JSONL or CSV export. Records are grouped by
/// (team_id, session_id) in first-appearance order; utterances keep file
/// order. Malformed records are reported with their line number.
std::vector<Transcript> load_transcripts(const std::string& path,
                                         FileFormat format,
                                         const LoadOptions& opts = {});

/// Writes transcripts back out as JSONL (the canonical format). A load of
/// the written file reproduces utterance text byte for byte.
void save_transcripts_jsonl(const std::string& path,
                            const std::vector<Transcript>& transcripts);

/// Splits a dialogue into three consecutive sections whose sizes differ by
/// at most one; when the count is not divisible by 3 the earlier sections
/// take the extra utterances. Requires at least 3 utterances.
std::array<Transcript, 3> segment_phases(const Transcript& t);

/// The requested slice of a dialogue; Whole returns it unchanged.
Transcript phase_slice(const Transcript& t, PhaseKind phase);

enum class SplitRule {
  Median,  // below the corpus median => HighPerforming
  Sign,    // below zero              => HighPerforming
};

/// Labels each score: values below the threshold (corpus median by default)
/// become HighPerforming, everything else LowPerforming. Ties fall to
/// LowPerforming.
std::vector<ConflictLabel> binarize_outcomes(
    const std::vector<ConflictScore>& scores,
    SplitRule rule = SplitRule::Median);

double median(std::vector<double> values);

}  // namespace teamvec::corpus
