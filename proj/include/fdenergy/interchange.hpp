#pragma once

#include "fdenergy/model.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fdenergy {

// Line-oriented schedule text:
//
//   # optional comments
//   slot 1
//   S H0 0
//   slot 2
//   S H1 1
//   H0 H2 0
//
// Slot headers are numbered 1..T consecutively; each transfer line is
// "<from> <to> <block>" with hosts spelled S or H<i>. A header followed by
// no transfers is an empty slot.

class ParseError : public std::runtime_error {
public:
   ParseError(std::size_t line, const std::string& message);
   std::size_t line() const { return line_; }

private:
   std::size_t line_;
};

std::string format_scheme(const Scheme& scheme, std::string_view comment = {});
void write_scheme(std::ostream& out, const Scheme& scheme, std::string_view comment = {});

Scheme parse_scheme(std::string_view text);
Scheme read_scheme(std::istream& in);

HostId parse_host(std::string_view token);

}  // namespace fdenergy
