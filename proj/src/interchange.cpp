#include "fdenergy/interchange.hpp"

#include <charconv>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <vector>

namespace fdenergy {

ParseError::ParseError(std::size_t line, const std::string& message)
   : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

template <typename Int>
bool parse_uint(std::string_view token, Int& value) {
   if (token.empty()) return false;
   auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
   return ec == std::errc{} && ptr == token.data() + token.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
   std::vector<std::string_view> tokens;
   std::size_t pos = 0;
   while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
      const auto start = pos;
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') ++pos;
      if (pos > start) tokens.push_back(line.substr(start, pos - start));
   }
   return tokens;
}

}  // namespace

HostId parse_host(std::string_view token) {
   if (token == "S") return HostId::server();
   std::uint32_t index = 0;
   if (token.size() >= 2 && token[0] == 'H' && parse_uint(token.substr(1), index)) return HostId::client(index);
   throw std::invalid_argument("bad host '" + std::string(token) + "' (expected S or H<i>)");
}

void write_scheme(std::ostream& out, const Scheme& scheme, std::string_view comment) {
   if (!comment.empty()) out << "# " << comment << '\n';
   for (std::size_t i = 0; i < scheme.slots.size(); ++i) {
      out << "slot " << i + 1 << '\n';
      for (const auto& t : scheme.slots[i].transfers) {
         out << t.from.to_string() << ' ' << t.to.to_string() << ' ' << t.block << '\n';
      }
   }
}

std::string format_scheme(const Scheme& scheme, std::string_view comment) {
   std::ostringstream out;
   write_scheme(out, scheme, comment);
   return out.str();
}

Scheme parse_scheme(std::string_view text) {
   Scheme scheme;
   std::size_t line_no = 0;
   std::size_t pos = 0;
   while (pos <= text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      auto line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      const auto tokens = split_ws(line);
      if (tokens.empty()) continue;

      if (tokens[0] == "slot") {
         std::size_t index = 0;
         if (tokens.size() != 2 || !parse_uint(tokens[1], index)) throw ParseError(line_no, "expected 'slot <index>'");
         if (index != scheme.slots.size() + 1) {
            throw ParseError(line_no, "slot " + std::to_string(index) + " out of sequence (expected " +
                                         std::to_string(scheme.slots.size() + 1) + ")");
         }
         scheme.slots.emplace_back();
         continue;
      }
      if (scheme.slots.empty()) throw ParseError(line_no, "transfer before the first slot header");
      if (tokens.size() != 3) throw ParseError(line_no, "expected '<from> <to> <block>'");
      Transfer transfer{HostId::server(), HostId::server(), 0};
      try {
         transfer.from = parse_host(tokens[0]);
         transfer.to = parse_host(tokens[1]);
      } catch (const std::invalid_argument& e) {
         throw ParseError(line_no, e.what());
      }
      if (!parse_uint(tokens[2], transfer.block)) throw ParseError(line_no, "bad block index");
      scheme.slots.back().transfers.push_back(transfer);
   }
   return scheme;
}

Scheme read_scheme(std::istream& in) {
   const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
   return parse_scheme(text);
}

}  // namespace fdenergy
