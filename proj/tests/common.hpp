#pragma once

#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "redsimpl/error.hpp"
#include "redsimpl/frontend.hpp"

inline std::string read_program_text(const std::string& name) {
  std::ifstream in(std::string(REDSIMPL_PROGRAMS_DIR) + "/" + name + ".red");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline redsimpl::Program load_program(const std::string& name) {
  return redsimpl::parse_program_or_throw(read_program_text(name));
}

/// Code of the redsimpl::Error thrown by f, or nullopt when nothing is thrown.
inline std::optional<redsimpl::ErrorCode> thrown_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const redsimpl::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline const char* const kCorpus[] = {"prefix_sum", "double_scan", "decomp_max", "distrib", "abft_mm", "rna_iloops"};
