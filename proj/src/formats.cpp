// SPDX-License-Identifier: Apache-2.0
#include "serval/formats.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "serval/errors.hpp"

namespace serval {
namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return in;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  if (line.find('\t') != std::string::npos) {
    std::string_view rest = line;
    while (true) {
      auto pos = rest.find('\t');
      fields.push_back(trim(rest.substr(0, pos)));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
  } else {
    std::istringstream ss(line);
    std::string field;
    while (ss >> field) fields.push_back(field);
  }
  return fields;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

json parse_json_line(const std::string& line, std::size_t line_no,
                     const char* what) {
  try {
    json obj = json::parse(line);
    if (!obj.is_object()) throw ParseError("not an object");
    return obj;
  } catch (const std::exception& e) {
    throw ParseError(std::string(what) + " line " + std::to_string(line_no) +
                     ": " + e.what());
  }
}

std::string required_string(const json& obj, const char* key,
                            std::size_t line_no, const char* what) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(std::string(what) + " line " + std::to_string(line_no) +
                     ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

std::vector<DocRef> parse_corpus(std::istream& in,
                                 const std::filesystem::path& base_dir) {
  std::vector<DocRef> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json obj = parse_json_line(line, line_no, "corpus");
    DocRef doc;
    doc.doc_id = required_string(obj, "_id", line_no, "corpus");
    if (doc.doc_id.empty()) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": empty _id");
    }
    if (auto it = obj.find("image_path"); it != obj.end() && it->is_string()) {
      std::filesystem::path p = it->get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      doc.source = ImageSource{p};
    } else if (auto t = obj.find("text"); t != obj.end() && t->is_string()) {
      doc.source = TextSource{t->get<std::string>()};
    } else {
      throw ParseError("corpus line " + std::to_string(line_no) +
                       ": needs 'image_path' or 'text'");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<DocRef> load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_corpus(in, path.parent_path());
}

void write_corpus(std::ostream& out, const std::vector<DocRef>& docs) {
  for (const auto& doc : docs) {
    json obj;
    obj["_id"] = doc.doc_id;
    if (const auto* image = std::get_if<ImageSource>(&doc.source)) {
      obj["image_path"] = image->path.string();
    } else {
      obj["text"] = std::get<TextSource>(doc.source).body;
    }
    out << obj.dump() << '\n';
  }
}

std::vector<Query> parse_queries(std::istream& in) {
  std::vector<Query> queries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json obj = parse_json_line(line, line_no, "queries");
    Query q;
    q.query_id = required_string(obj, "_id", line_no, "queries");
    q.text = required_string(obj, "text", line_no, "queries");
    if (q.query_id.empty() || q.text.empty()) {
      throw ParseError("queries line " + std::to_string(line_no) +
                       ": empty _id or text");
    }
    queries.push_back(std::move(q));
  }
  return queries;
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_queries(in);
}

void write_queries(std::ostream& out, const std::vector<Query>& queries) {
  for (const auto& q : queries) {
    out << json{{"_id", q.query_id}, {"text", q.text}}.dump() << '\n';
  }
}

Qrels parse_qrels(std::istream& in) {
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto fields = split_fields(line);
    const bool header_allowed = first_content_line;
    first_content_line = false;

    std::string qid, docid, grade_field;
    if (fields.size() == 3) {
      qid = fields[0];
      docid = fields[1];
      grade_field = fields[2];
    } else if (fields.size() == 4) {
      qid = fields[0];
      docid = fields[2];
      grade_field = fields[3];
    } else {
      throw ParseError("qrels line " + std::to_string(line_no) +
                       ": expected 3 or 4 columns, got " +
                       std::to_string(fields.size()));
    }
    int grade = 0;
    if (!parse_number(grade_field, grade)) {
      if (header_allowed) continue;
      throw ParseError("qrels line " + std::to_string(line_no) +
                       ": relevance '" + grade_field + "' is not an integer");
    }
    if (grade < 0) {
      throw ParseError("qrels line " + std::to_string(line_no) +
                       ": negative relevance");
    }
    if (qid.empty() || docid.empty()) {
      throw ParseError("qrels line " + std::to_string(line_no) + ": empty id");
    }
    qrels.judgments[qid][docid] = grade;
  }
  return qrels;
}

Qrels load_qrels(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_qrels(in);
}

void write_qrels(std::ostream& out, const Qrels& qrels) {
  out << "query-id\tcorpus-id\tscore\n";
  for (const auto& [qid, docs] : qrels.judgments) {
    for (const auto& [docid, grade] : docs) {
      out << qid << '\t' << docid << '\t' << grade << '\n';
    }
  }
}

Run parse_run(std::istream& in) {
  Run run;
  bool have_tag = false;
  std::map<QueryId, std::vector<ScoredDoc>> grouped;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    for (std::string f; ss >> f;) fields.push_back(f);
    if (fields.size() != 6) {
      throw ParseError("run line " + std::to_string(line_no) +
                       ": expected 6 columns");
    }
    long rank = 0;
    double score = 0.0;
    if (!parse_number(fields[3], rank) || rank < 1) {
      throw ParseError("run line " + std::to_string(line_no) + ": bad rank");
    }
    if (!parse_number(fields[4], score)) {
      throw ParseError("run line " + std::to_string(line_no) + ": bad score");
    }
    if (!have_tag) {
      run.tag = fields[5];
      have_tag = true;
    } else if (fields[5] != run.tag) {
      throw ParseError("run line " + std::to_string(line_no) +
                       ": mixed run tags '" + run.tag + "' and '" + fields[5] +
                       "'");
    }
    grouped[fields[0]].push_back({fields[2], score});
  }
  for (auto& [qid, docs] : grouped) {
    run.rankings.push_back(RunList::make(qid, std::move(docs)));
  }
  return run;
}

Run load_run(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_run(in);
}

void write_run(std::ostream& out, const Run& run) {
  const std::string tag = run.tag.empty() ? "serval" : run.tag;
  for (const auto& ranking : run.rankings) {
    std::size_t rank = 1;
    for (const auto& entry : ranking.ranking()) {
      out << ranking.query_id() << " Q0 " << entry.doc_id << ' ' << rank++
          << ' ' << format_score(entry.score) << ' ' << tag << '\n';
    }
  }
}

void save_run(const std::filesystem::path& path, const Run& run) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write run file '" + path.string() + "'");
  write_run(out, run);
}

std::string format_score(double score) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, score);
  std::string shortest(buf, ptr);
  int significant = 0;
  bool leading = true;
  for (char c : shortest) {
    if (c == 'e' || c == 'E') break;
    if (c < '0' || c > '9') continue;
    if (leading && c == '0') continue;
    leading = false;
    ++significant;
  }
  if (significant >= 6) return shortest;
  std::snprintf(buf, sizeof buf, "%#.6g", score);
  return buf;
}

std::pair<std::string, std::string> split_run_tag(const std::string& tag) {
  auto pos = tag.find('+');
  if (pos == std::string::npos) return {tag, ""};
  return {tag.substr(0, pos), tag.substr(pos + 1)};
}

}  // namespace serval
