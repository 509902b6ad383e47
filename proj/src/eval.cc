// src/eval.cc

// Copyright 2026  The fieldasr Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fieldasr/eval.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "fieldasr/acoustic.h"
#include "fieldasr/errors.h"
#include "fieldasr/text.h"
#include "fieldasr/train.h"

namespace fieldasr {

namespace {

std::vector<std::string> Words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string Percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
  return buf;
}

std::string PadRight(const std::string& s, std::size_t width) {
  const std::size_t n = CountCodepoints(s);
  return n >= width ? s : s + std::string(width - n, ' ');
}

}  // namespace

double Cer(std::string_view ref, std::string_view hyp,
           const Orthography& orth) {
  const std::vector<std::string> r = orth.TokenizeSymbols(ref);
  if (r.empty()) throw ValidationError("CER needs a non-empty reference");
  const std::vector<std::string> h = orth.TokenizeSymbols(hyp);
  return static_cast<double>(EditDistance<std::string>(r, h)) /
         static_cast<double>(r.size());
}

double Wer(std::string_view ref, std::string_view hyp) {
  const std::vector<std::string> r = Words(ref);
  if (r.empty()) throw ValidationError("WER needs a non-empty reference");
  const std::vector<std::string> h = Words(hyp);
  return static_cast<double>(EditDistance<std::string>(r, h)) /
         static_cast<double>(r.size());
}

EvalReport ScoreTranscripts(std::span<const TranscriptPair> pairs,
                            const Orthography& orth) {
  if (pairs.empty()) throw DataError("nothing to evaluate");
  EvalReport report;
  for (const TranscriptPair& p : pairs) {
    const std::vector<std::string> r = orth.TokenizeSymbols(p.reference);
    const std::vector<std::string> h = orth.TokenizeSymbols(p.hypothesis);
    SegmentScore s;
    s.id = p.id;
    s.reference = p.reference;
    s.hypothesis = p.hypothesis;
    s.edits = EditDistance<std::string>(r, h);
    s.reference_length = r.size();
    s.cer = r.empty() ? static_cast<double>(s.edits)
                      : static_cast<double>(s.edits) /
                            static_cast<double>(r.size());
    report.total_edits += s.edits;
    report.total_reference += s.reference_length;
    report.segments.push_back(std::move(s));
  }
  if (report.total_reference == 0) {
    throw DataError("all references are empty; CER is undefined");
  }
  report.aggregate_cer = static_cast<double>(report.total_edits) /
                         static_cast<double>(report.total_reference);
  return report;
}

EvalReport Evaluate(const AcousticModel& model,
                    std::span<const Utterance> utterances,
                    const Orthography& orth) {
  std::vector<TranscriptPair> pairs;
  pairs.reserve(utterances.size());
  for (const Utterance& u : utterances) {
    pairs.push_back({u.id, u.transcript,
                     GreedyDecode(model.Forward(u.clip), model.vocab())});
  }
  return ScoreTranscripts(pairs, orth);
}

std::string EvalReport::ToTable() const {
  std::ostringstream out;
  std::size_t id_width = 2;
  for (const SegmentScore& s : segments) {
    id_width = std::max(id_width, CountCodepoints(s.id));
  }
  out << PadRight("id", id_width) << "  CER(%)  edits/len  reference | hypothesis\n";
  for (const SegmentScore& s : segments) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "  %6s  %4zu/%-4zu  ", Percent(s.cer).c_str(),
                  s.edits, s.reference_length);
    out << PadRight(s.id, id_width) << buf << s.reference << " | "
        << s.hypothesis << "\n";
  }
  out << "aggregate CER " << Percent(aggregate_cer) << "% (" << total_edits
      << " edits / " << total_reference << " graphemes, " << segments.size()
      << " segments)\n";
  return out.str();
}

std::string EvalReport::ToJsonl() const {
  std::string out;
  for (const SegmentScore& s : segments) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["reference"] = s.reference;
    j["hypothesis"] = s.hypothesis;
    j["edits"] = s.edits;
    j["reference_length"] = s.reference_length;
    j["cer"] = s.cer;
    out += j.dump() + "\n";
  }
  nlohmann::ordered_json summary;
  summary["summary"] = true;
  summary["segments"] = segments.size();
  summary["total_edits"] = total_edits;
  summary["total_reference"] = total_reference;
  summary["aggregate_cer"] = aggregate_cer;
  out += summary.dump() + "\n";
  return out;
}

EvalReport EvalReport::FromJsonl(std::string_view text) {
  EvalReport report;
  bool have_summary = false;
  std::size_t lineno = 0;
  for (const std::string& raw : SplitString(text, '\n')) {
    ++lineno;
    std::string_view line = TrimWhitespace(raw);
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      if (j.contains("summary")) {
        report.total_edits = j.at("total_edits").get<std::size_t>();
        report.total_reference = j.at("total_reference").get<std::size_t>();
        report.aggregate_cer = j.at("aggregate_cer").get<double>();
        have_summary = true;
        continue;
      }
      SegmentScore s;
      s.id = j.at("id").get<std::string>();
      s.reference = j.at("reference").get<std::string>();
      s.hypothesis = j.at("hypothesis").get<std::string>();
      s.edits = j.at("edits").get<std::size_t>();
      s.reference_length = j.at("reference_length").get<std::size_t>();
      s.cer = j.at("cer").get<double>();
      report.segments.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (!have_summary) throw ValidationError("evaluation report has no summary");
  return report;
}

void SpeedupEntry::Validate() const {
  if (!(time_without_s > 0.0) || !(time_with_s > 0.0)) {
    throw ValidationError("transcription times must be positive (sample '" +
                          sample_id + "')");
  }
  if (!(cer_without >= 0.0) || !(cer_with >= 0.0)) {
    throw ValidationError("CER values must be non-negative (sample '" +
                          sample_id + "')");
  }
  if (!(length_s >= 0.0)) {
    throw ValidationError("sample length must be non-negative");
  }
}

std::string FormatSpeedup(double time_without_s, double time_with_s) {
  if (!(time_without_s > 0.0) || !(time_with_s > 0.0)) {
    throw ValidationError("transcription times must be positive");
  }
  const double ratio = time_without_s / time_with_s;
  // Round half up at one decimal; the epsilon absorbs representation error
  // in ratios such as 0.25 * 10.
  const double tenths = std::floor(ratio * 10.0 + 0.5 + 1e-9);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f×", tenths / 10.0);
  return buf;
}

std::string FormatDuration(double seconds) {
  char buf[32];
  const double rounded = std::round(seconds);
  if (std::abs(seconds - rounded) < 1e-9 && rounded >= 60.0 &&
      std::fmod(rounded, 60.0) == 0.0) {
    std::snprintf(buf, sizeof(buf), "%.0fmin", rounded / 60.0);
  } else if (seconds < 600.0) {
    std::snprintf(buf, sizeof(buf), "%.0fsec", seconds);
  } else {
    std::snprintf(buf, sizeof(buf), "%.1fmin", seconds / 60.0);
  }
  return buf;
}

std::string SpeedupReport(std::span<const SpeedupEntry> entries) {
  if (entries.empty()) throw ValidationError("no speedup entries");
  for (const SpeedupEntry& e : entries) e.Validate();
  const std::vector<std::string> header = {"Sample", "Length", "Without",
                                           "CER (%)", "With", "CER (%)",
                                           "Speedup"};
  std::vector<std::vector<std::string>> rows;
  for (const SpeedupEntry& e : entries) {
    rows.push_back({e.sample_id, FormatDuration(e.length_s),
                    FormatDuration(e.time_without_s), Percent(e.cer_without),
                    FormatDuration(e.time_with_s), Percent(e.cer_with),
                    FormatSpeedup(e.time_without_s, e.time_with_s)});
  }
  std::vector<std::size_t> widths(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    widths[c] = CountCodepoints(header[c]);
    for (const auto& row : rows) {
      widths[c] = std::max(widths[c], CountCodepoints(row[c]));
    }
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "  " : "") << PadRight(row[c], widths[c]);
    }
    out << "\n";
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out.str();
}

std::string SpeedupEntryToJson(const SpeedupEntry& e) {
  nlohmann::ordered_json j;
  j["sample_id"] = e.sample_id;
  j["length_s"] = e.length_s;
  j["time_without_s"] = e.time_without_s;
  j["time_with_s"] = e.time_with_s;
  j["cer_without"] = e.cer_without;
  j["cer_with"] = e.cer_with;
  return j.dump();
}

SpeedupEntry SpeedupEntryFromJson(std::string_view line) {
  try {
    const nlohmann::json j = nlohmann::json::parse(line);
    SpeedupEntry e;
    e.sample_id = j.at("sample_id").get<std::string>();
    e.length_s = j.at("length_s").get<double>();
    e.time_without_s = j.at("time_without_s").get<double>();
    e.time_with_s = j.at("time_with_s").get<double>();
    e.cer_without = j.at("cer_without").get<double>();
    e.cer_with = j.at("cer_with").get<double>();
    e.Validate();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("bad speedup record: ") + ex.what());
  }
}

}  // namespace fieldasr
