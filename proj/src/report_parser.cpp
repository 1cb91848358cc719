#include "fedchip/report_parser.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "json.hpp"

#include "fedchip/error.hpp"

namespace fedchip {

namespace {

struct UnitScale {
  std::string_view unit;
  double divisor;  // value / divisor gives the canonical unit
};

struct MetricGrammar {
  std::string_view phrase;  // lower case, words separated by one space
  std::string_view name;
  std::array<UnitScale, 3> units;
  std::size_t unit_count;
};

// Extend here if real reports use other phrases or units.
constexpr std::array<MetricGrammar, 3> kGrammar = {{
    {"design area", "area", {{{"u^2", 1.0}, {"um^2", 1.0}, {"", 0.0}}}, 2},
    {"total power",
     "total_power",
     {{{"W", 1.0}, {"mW", 1e3}, {"uW", 1e6}}},
     3},
    {"worst slack", "slack", {{{"ns", 1.0}, {"ps", 1e3}, {"", 0.0}}}, 2},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string_view next_token(std::string_view& s) {
  s = trim(s);
  std::size_t end = 0;
  while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end]))) ++end;
  std::string_view tok = s.substr(0, end);
  s.remove_prefix(end);
  return tok;
}

// Matches the key phrase word by word, case-insensitively. On success the
// phrase (and an optional ':' / '=') is consumed from `line`.
bool match_phrase(std::string_view& line, std::string_view phrase) {
  std::string_view rest = line;
  while (!phrase.empty()) {
    std::size_t sp = phrase.find(' ');
    std::string_view word = phrase.substr(0, sp);
    phrase = sp == std::string_view::npos ? std::string_view{} : phrase.substr(sp + 1);
    rest = trim(rest);
    if (rest.size() < word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(rest[i])) != word[i]) return false;
    }
    rest.remove_prefix(word.size());
    // The word must end here (avoid matching "designarea" or "totals").
    if (!rest.empty() && std::isalnum(static_cast<unsigned char>(rest.front()))) {
      return false;
    }
  }
  rest = trim(rest);
  if (!rest.empty() && (rest.front() == ':' || rest.front() == '=')) rest.remove_prefix(1);
  line = rest;
  return true;
}

bool parse_number(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size() && std::isfinite(out);
}

std::string where(const ReportDoc& doc, std::size_t line_no) {
  std::string s = doc.source_name.empty() ? std::string("report") : doc.source_name;
  return s + ":" + std::to_string(line_no);
}

}  // namespace

PpaMetrics parse_ppa(const ReportDoc& doc) {
  if (trim(doc.raw_text).empty()) throw validation_error("report is empty");

  std::array<std::optional<double>, 3> values;
  std::string_view text = doc.raw_text;
  std::size_t line_no = 0;
  while (!text.empty()) {
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    for (std::size_t g = 0; g < kGrammar.size(); ++g) {
      const MetricGrammar& grammar = kGrammar[g];
      std::string_view rest = line;
      if (!match_phrase(rest, grammar.phrase)) continue;

      std::string_view num_tok = next_token(rest);
      double value = 0.0;
      if (!parse_number(num_tok, value)) {
        throw parse_error(where(doc, line_no) + ": malformed number '" +
                          std::string(num_tok) + "' for " + std::string(grammar.name));
      }
      std::string_view unit_tok = next_token(rest);
      const UnitScale* scale = nullptr;
      for (std::size_t u = 0; u < grammar.unit_count; ++u) {
        if (grammar.units[u].unit == unit_tok) scale = &grammar.units[u];
      }
      if (scale == nullptr) {
        throw parse_error(where(doc, line_no) + ": unsupported unit '" +
                          std::string(unit_tok) + "' for " + std::string(grammar.name));
      }
      if (values[g]) {
        throw validation_error(where(doc, line_no) + ": ambiguous report, duplicate metric: " +
                               std::string(grammar.name));
      }
      values[g] = scale->divisor == 1.0 ? value : value / scale->divisor;
      break;
    }
  }

  for (std::size_t g = 0; g < kGrammar.size(); ++g) {
    if (!values[g]) {
      throw validation_error("missing metric: " + std::string(kGrammar[g].name));
    }
  }
  PpaMetrics m{*values[0], *values[1], *values[2]};
  validate_metrics(m);
  return m;
}

ReportDoc read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open report: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ReportDoc{ss.str(), path.string()};
}

std::vector<BatchResult> parse_batch(const std::vector<std::filesystem::path>& paths) {
  std::vector<BatchResult> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    BatchResult r;
    r.source = p.string();
    try {
      r.metrics = parse_ppa(read_report(p));
    } catch (const Error& e) {
      // Location-carrying messages already start with the source name.
      r.error = e.what();
      if (r.error.rfind(r.source + ":", 0) != 0) r.error = r.source + ": " + r.error;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string batch_row_json(const std::string& source, const PpaMetrics& m) {
  nlohmann::ordered_json j;
  j["source"] = source;
  j["area_um2"] = m.area;
  j["total_power_w"] = m.total_power;
  j["slack_ns"] = m.slack;
  return j.dump();
}

}  // namespace fedchip
