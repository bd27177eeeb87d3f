#include "teamvec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "teamvec/errors.hpp"

namespace teamvec::corpus {

using nlohmann::json;

std::vector<std::string> Transcript::speakers() const {
  std::vector<std::string> out;
  for (const auto& u : utterances) {
    if (std::find(out.begin(), out.end(), u.speaker_id) == out.end()) {
      out.push_back(u.speaker_id);
    }
  }
  return out;
}

namespace {

struct RawRecord {
  std::string team_id;
  std::string session_id;
  std::string speaker;
  std::string text;
  std::optional<double> z;
  std::optional<std::string> da_tag;
  size_t line = 0;
};

[[noreturn]] void fail_line(size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

RawRecord parse_jsonl_record(const std::string& line_text, size_t line_no) {
  json j;
  try {
    j = json::parse(line_text);
  } catch (const json::parse_error& e) {
    fail_line(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail_line(line_no, "record is not a JSON object");

  RawRecord r;
  r.line = line_no;
  for (const char* key : {"team_id", "session_id", "speaker", "text"}) {
    if (!j.contains(key)) {
      fail_line(line_no, std::string("missing \"") + key + "\" field");
    }
    if (!j[key].is_string()) {
      fail_line(line_no, std::string("field \"") + key + "\" must be a string");
    }
  }
  r.team_id = j["team_id"].get<std::string>();
  r.session_id = j["session_id"].get<std::string>();
  r.speaker = j["speaker"].get<std::string>();
  r.text = j["text"].get<std::string>();
  if (j.contains("process_conflict_z") && !j["process_conflict_z"].is_null()) {
    if (!j["process_conflict_z"].is_number()) {
      fail_line(line_no, "field \"process_conflict_z\" must be a number");
    }
    r.z = j["process_conflict_z"].get<double>();
  }
  if (j.contains("da_tag") && !j["da_tag"].is_null()) {
    if (!j["da_tag"].is_string()) {
      fail_line(line_no, "field \"da_tag\" must be a string");
    }
    r.da_tag = j["da_tag"].get<std::string>();
  }
  return r;
}

// Splits one CSV line into fields. Quoted fields may contain commas and
// doubled quotes; embedded newlines are not supported (JSONL is canonical).
std::vector<std::string> split_csv_line(const std::string& line,
                                        size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (in_quotes) fail_line(line_no, "unterminated quoted CSV field");
  fields.push_back(std::move(cur));
  return fields;
}

RawRecord parse_csv_record(const std::string& line_text, size_t line_no) {
  auto fields = split_csv_line(line_text, line_no);
  if (fields.size() < 4) {
    fail_line(line_no, "expected at least 4 CSV columns "
                       "(team_id,session_id,speaker,text)");
  }
  RawRecord r;
  r.line = line_no;
  r.team_id = fields[0];
  r.session_id = fields[1];
  r.speaker = fields[2];
  r.text = fields[3];
  if (fields.size() >= 5 && !fields[4].empty()) {
    try {
      size_t pos = 0;
      r.z = std::stod(fields[4], &pos);
      if (pos != fields[4].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      fail_line(line_no, "process_conflict_z is not a number: " + fields[4]);
    }
  }
  return r;
}

void append_record(std::vector<Transcript>& out,
                   std::map<std::pair<std::string, std::string>, size_t>& index,
                   const RawRecord& r, const LoadOptions& opts) {
  if (r.speaker.empty()) fail_line(r.line, "empty \"speaker\" field");
  if (r.team_id.empty()) fail_line(r.line, "empty \"team_id\" field");
  if (r.text.empty() && !opts.allow_empty_text) {
    fail_line(r.line, "empty utterance text (pass allow_empty_text to accept)");
  }
  if (r.z && !std::isfinite(*r.z)) {
    fail_line(r.line, "process_conflict_z must be finite");
  }

  auto key = std::make_pair(r.team_id, r.session_id);
  auto it = index.find(key);
  if (it == index.end()) {
    index.emplace(key, out.size());
    out.push_back(Transcript{r.team_id, r.session_id, {}, std::nullopt});
    it = index.find(key);
  }
  Transcript& t = out[it->second];

  if (r.z) {
    if (t.outcome && t.outcome->process_conflict_z != *r.z) {
      fail_line(r.line, "conflicting process_conflict_z for team " +
                            r.team_id + " session " + r.session_id);
    }
    t.outcome = ConflictScore{*r.z};
  }

  Utterance u;
  u.speaker_id = r.speaker;
  u.text = r.text;
  u.index = t.utterances.size();
  u.da_tag = r.da_tag;
  t.utterances.push_back(std::move(u));
}

}  // namespace

std::vector<Transcript> load_transcripts(const std::string& path,
                                         FileFormat format,
                                         const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::vector<Transcript> out;
  std::map<std::pair<std::string, std::string>, size_t> index;

  std::string line;
  size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (format == FileFormat::Csv && !saw_header) {
      saw_header = true;
      auto header = split_csv_line(line, line_no);
      if (header.empty() || header[0] != "team_id") {
        fail_line(line_no, "CSV header row must start with \"team_id\"");
      }
      continue;
    }
    if (line.empty()) continue;
    RawRecord r = format == FileFormat::Jsonl
                      ? parse_jsonl_record(line, line_no)
                      : parse_csv_record(line, line_no);
    append_record(out, index, r, opts);
  }
  if (format == FileFormat::Csv && !saw_header) {
    throw DataError("CSV file is empty; a header row is mandatory: " + path);
  }

  for (const auto& t : out) {
    if (t.utterances.empty()) continue;
    if (t.speakers().size() < 2) {
      throw DataError("transcript for team " + t.team_id + " session " +
                      t.session_id + " has fewer than 2 distinct speakers");
    }
  }
  return out;
}

void save_transcripts_jsonl(const std::string& path,
                            const std::vector<Transcript>& transcripts) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  for (const auto& t : transcripts) {
    for (const auto& u : t.utterances) {
      json j;
      j["team_id"] = t.team_id;
      j["session_id"] = t.session_id;
      j["speaker"] = u.speaker_id;
      j["text"] = u.text;
      if (t.outcome) j["process_conflict_z"] = t.outcome->process_conflict_z;
      if (u.da_tag) j["da_tag"] = *u.da_tag;
      out << j.dump() << "\n";
    }
  }
}

std::array<Transcript, 3> segment_phases(const Transcript& t) {
  const size_t n = t.utterances.size();
  if (n < 3) {
    throw DataError("transcript for team " + t.team_id +
                    " has fewer than 3 utterances; cannot segment phases");
  }
  const size_t base = n / 3;
  const size_t rem = n % 3;

  std::array<Transcript, 3> segments;
  size_t pos = 0;
  for (size_t i = 0; i < 3; ++i) {
    size_t len = base + (i < rem ? 1 : 0);
    Transcript seg;
    seg.team_id = t.team_id;
    seg.session_id = t.session_id;
    seg.outcome = t.outcome;
    seg.utterances.assign(t.utterances.begin() + pos,
                          t.utterances.begin() + pos + len);
    segments[i] = std::move(seg);
    pos += len;
  }
  return segments;
}

Transcript phase_slice(const Transcript& t, PhaseKind phase) {
  if (phase == PhaseKind::Whole) return t;
  auto segs = segment_phases(t);
  switch (phase) {
    case PhaseKind::Initial: return segs[0];
    case PhaseKind::Middle: return segs[1];
    case PhaseKind::End: return segs[2];
    default: return t;
  }
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of empty list");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<ConflictLabel> binarize_outcomes(
    const std::vector<ConflictScore>& scores, SplitRule rule) {
  if (scores.empty()) throw DataError("binarize_outcomes: empty score list");
  std::vector<double> zs;
  zs.reserve(scores.size());
  for (const auto& s : scores) {
    if (!std::isfinite(s.process_conflict_z)) {
      throw DataError("binarize_outcomes: non-finite z-score");
    }
    zs.push_back(s.process_conflict_z);
  }
  const double threshold = rule == SplitRule::Median ? median(zs) : 0.0;

  std::vector<ConflictLabel> labels;
  labels.reserve(scores.size());
  for (double z : zs) {
    labels.push_back(z < threshold ? ConflictLabel::HighPerforming
                                   : ConflictLabel::LowPerforming);
  }
  return labels;
}

}  // namespace teamvec::corpus
