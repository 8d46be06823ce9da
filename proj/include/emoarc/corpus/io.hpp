#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "emoarc/corpus/sentence_split.hpp"
#include "emoarc/corpus/types.hpp"
#include "emoarc/error.hpp"
#include "emoarc/util.hpp"

namespace emoarc::corpus {

struct LabeledFormat {
  /// Annotators restricted to the six-label scheme.
  std::set<AnnotatorId> reduced_scheme_annotators = {"a3"};
  /// Minimum labels per sentence after dropping empty cells.
  std::size_t min_labels = 2;
};

namespace detail {

inline std::string where(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line) + ": ";
}

}  // namespace detail

/// Parses the labeled-corpus TSV. The first row is a header naming the
/// columns story_id, author, index, text and one or more label_<annotator>.
/// Stories keep first-appearance order; sentences are sorted by index.
inline std::vector<Story> parse_labeled(const std::string& content, const std::string& path = "<input>",
                                        const LabeledFormat& format = {}) {
  auto lines = split_lines(content);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw ValidationError(path + ": missing header row");

  const auto header = split_char(lines[first], '\t');
  std::map<std::string, std::size_t> col;
  std::vector<std::pair<AnnotatorId, std::size_t>> label_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(trim(header[i]));
    if (col.count(name)) throw ValidationError(detail::where(path, first + 1) + "duplicate column " + name);
    col[name] = i;
    if (name.rfind("label_", 0) == 0 && name.size() > 6) label_cols.emplace_back(name.substr(6), i);
  }
  for (const char* required : {"story_id", "author", "index", "text"})
    if (!col.count(required))
      throw ValidationError(path + ": missing required column '" + required + "'");
  if (label_cols.size() < format.min_labels)
    throw ValidationError(path + ": missing required label columns (need at least " +
                          std::to_string(format.min_labels) + ")");

  std::vector<Story> stories;
  std::map<std::string, std::size_t> story_pos;
  std::set<std::pair<std::string, std::size_t>> seen;

  for (std::size_t ln = first + 1; ln < lines.size(); ++ln) {
    const auto& line = lines[ln];
    if (trim(line).empty()) continue;
    const auto at = detail::where(path, ln + 1);
    const auto cells = split_char(line, '\t');
    if (cells.size() != header.size())
      throw ValidationError(at + "malformed row: expected " + std::to_string(header.size()) +
                            " columns, got " + std::to_string(cells.size()));

    AnnotatedSentence s;
    s.story_id = std::string(trim(cells[col["story_id"]]));
    if (s.story_id.empty()) throw ValidationError(at + "malformed row: empty story_id");
    const auto author = parse_author(trim(cells[col["author"]]));
    if (!author) throw ValidationError(at + "malformed row: unknown author '" + cells[col["author"]] + "'");
    long long idx = 0;
    if (!parse_int(cells[col["index"]], idx) || idx < 0)
      throw ValidationError(at + "malformed row: bad index '" + cells[col["index"]] + "'");
    s.index = static_cast<std::size_t>(idx);
    s.text = cells[col["text"]];

    for (const auto& [ann, c] : label_cols) {
      const auto token = trim(cells[c]);
      if (token.empty()) continue;
      const auto label = parse_label(token);
      if (!label) throw ValidationError(at + "unknown label token '" + std::string(token) + "'");
      if (format.reduced_scheme_annotators.count(ann) && !in_reduced_scheme(*label))
        throw ValidationError(at + "label '" + std::string(token) + "' violates the six-label scheme of annotator " + ann);
      s.labels[ann] = *label;
    }
    if (s.labels.size() < format.min_labels)
      throw ValidationError(at + "malformed row: fewer than " + std::to_string(format.min_labels) + " labels");

    if (!seen.insert({s.story_id, s.index}).second)
      throw ValidationError(at + "duplicate (story_id, index) = (" + s.story_id + ", " + std::to_string(s.index) + ")");

    auto it = story_pos.find(s.story_id);
    if (it == story_pos.end()) {
      it = story_pos.emplace(s.story_id, stories.size()).first;
      stories.push_back(Story{s.story_id, *author, {}});
    } else if (stories[it->second].author != *author) {
      throw ValidationError(at + "story " + s.story_id + " has conflicting authors");
    }
    stories[it->second].sentences.push_back(std::move(s));
  }

  for (auto& story : stories) {
    std::sort(story.sentences.begin(), story.sentences.end(),
              [](const auto& a, const auto& b) { return a.index < b.index; });
    for (std::size_t i = 0; i < story.sentences.size(); ++i)
      if (story.sentences[i].index != i)
        throw ValidationError(path + ": story " + story.story_id + " has non-contiguous indices (missing " +
                              std::to_string(i) + ")");
  }
  return stories;
}

inline std::vector<Story> ingest_labeled(const std::string& path, const LabeledFormat& format = {}) {
  return parse_labeled(read_file(path), path, format);
}

/// Writes stories in the format parse_labeled reads. Annotator columns are
/// the union over the corpus, sorted.
inline std::string format_labeled(const std::vector<Story>& stories) {
  std::set<AnnotatorId> annotators;
  for (const auto& st : stories)
    for (const auto& s : st.sentences)
      for (const auto& [a, l] : s.labels) annotators.insert(a);

  std::string out = "story_id\tauthor\tindex\ttext";
  for (const auto& a : annotators) out += "\tlabel_" + a;
  out += '\n';
  for (const auto& st : stories) {
    for (const auto& s : st.sentences) {
      if (s.text.find_first_of("\t\n\r") != std::string::npos)
        throw ValidationError("sentence text contains tab or newline: " + st.story_id + "/" + std::to_string(s.index));
      out += st.story_id;
      out += '\t';
      out += to_string(st.author);
      out += '\t' + std::to_string(s.index) + '\t' + s.text;
      for (const auto& a : annotators) {
        out += '\t';
        if (auto it = s.labels.find(a); it != s.labels.end()) out += to_string(it->second);
      }
      out += '\n';
    }
  }
  return out;
}

/// JSON Lines: {"doc_id": ..., "index": ..., "text": ...} per sentence.
inline UnlabeledCorpus parse_unlabeled_jsonl(const std::string& content, const std::string& path = "<input>") {
  UnlabeledCorpus corpus;
  std::map<std::string, std::size_t> pos;
  std::vector<std::map<std::size_t, std::string>> rows;
  const auto lines = split_lines(content);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto at = detail::where(path, ln + 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[ln]);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(at + "malformed JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("doc_id") || !j.contains("index") || !j.contains("text") ||
        !j["index"].is_number_integer() || !j["text"].is_string())
      throw ValidationError(at + "expected object with doc_id, integer index and string text");
    const std::string doc = j["doc_id"].is_string() ? j["doc_id"].get<std::string>() : j["doc_id"].dump();
    const auto index = j["index"].get<long long>();
    auto text = j["text"].get<std::string>();
    if (index < 0) throw ValidationError(at + "negative index");
    if (trim(text).empty()) throw ValidationError(at + "empty sentence");
    auto it = pos.find(doc);
    if (it == pos.end()) {
      it = pos.emplace(doc, corpus.documents.size()).first;
      corpus.documents.push_back(Document{doc, {}});
      rows.emplace_back();
    }
    if (!rows[it->second].emplace(static_cast<std::size_t>(index), std::move(text)).second)
      throw ValidationError(at + "duplicate (doc_id, index)");
  }
  for (std::size_t d = 0; d < rows.size(); ++d) {
    std::size_t expect = 0;
    for (auto& [i, text] : rows[d]) {
      if (i != expect++) throw ValidationError(path + ": document " + corpus.documents[d].doc_id + " has non-contiguous indices");
      corpus.documents[d].sentences.push_back(std::move(text));
    }
  }
  return corpus;
}

/// Loads .jsonl files as sentence rows; any other file is raw text that is
/// run through split_sentences, with the file stem as doc_id.
inline UnlabeledCorpus ingest_unlabeled(const std::vector<std::string>& paths) {
  UnlabeledCorpus corpus;
  for (const auto& p : paths) {
    const std::filesystem::path fp(p);
    if (fp.extension() == ".jsonl") {
      auto part = parse_unlabeled_jsonl(read_file(p), p);
      for (auto& d : part.documents) corpus.documents.push_back(std::move(d));
    } else {
      Document d{fp.stem().string(), split_sentences(read_file(p))};
      if (!d.sentences.empty()) corpus.documents.push_back(std::move(d));
    }
  }
  std::set<std::string> ids;
  for (const auto& d : corpus.documents)
    if (!ids.insert(d.doc_id).second) throw ValidationError("duplicate doc_id across inputs: " + d.doc_id);
  return corpus;
}

inline std::string format_unlabeled_jsonl(const UnlabeledCorpus& corpus) {
  std::string out;
  for (const auto& d : corpus.documents)
    for (std::size_t i = 0; i < d.sentences.size(); ++i)
      out += nlohmann::json{{"doc_id", d.doc_id}, {"index", i}, {"text", d.sentences[i]}}.dump() + "\n";
  return out;
}

/// Split manifest: story_id<TAB>partition per line.
inline std::map<std::string, PartitionName> parse_manifest(const std::string& content,
                                                           const std::string& path = "<manifest>") {
  std::map<std::string, PartitionName> out;
  const auto lines = split_lines(content);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty() || lines[ln][0] == '#') continue;
    const auto cells = split_char(lines[ln], '\t');
    const auto at = detail::where(path, ln + 1);
    if (cells.size() != 2) throw ValidationError(at + "expected story_id<TAB>partition");
    const auto p = parse_partition(trim(cells[1]));
    if (!p) {
      if (ln == 0 && trim(cells[0]) == "story_id") continue;  // header
      throw ValidationError(at + "unknown partition '" + cells[1] + "'");
    }
    if (!out.emplace(std::string(trim(cells[0])), *p).second)
      throw ValidationError(at + "story listed twice: " + cells[0]);
  }
  return out;
}

inline std::string format_manifest(const std::vector<Partition>& partitions) {
  std::vector<std::pair<std::string, PartitionName>> rows;
  for (const auto& p : partitions)
    for (const auto& id : p.story_ids) rows.emplace_back(id, p.name);
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto& [id, p] : rows) {
    out += id;
    out += '\t';
    out += to_string(p);
    out += '\n';
  }
  return out;
}

}  // namespace emoarc::corpus
