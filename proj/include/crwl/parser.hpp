#pragma once

#include "crwl/module.hpp"

namespace crwl {

struct ParseError : Error {
  ParseError(const std::string& msg, int line, int col)
      : Error(msg + " at " + std::to_string(line) + ":" + std::to_string(col)),
        line(line),
        col(col) {}
  int line, col;
};

struct ParseOptions {
  // Tool-emitted files may contain `_|_` and labeled symbols; user sources
  // may not.
  bool allow_internal = false;
};

// A named definition from a source file: either a literal module body
// (validated against its declared interface) or a module-expression binding.
struct SourceModule {
  std::string name;
  FnSig declared_params;
  FnSig declared_exports;
  std::optional<Module> module;
  ExprPtr binding;
  std::vector<std::string> warnings;
};

struct ParsedFile {
  std::vector<SourceModule> modules;
};

ParsedFile parse_file(std::string_view text, ParseOptions opts = {});
// Exactly one definition.
SourceModule parse_module(std::string_view text, ParseOptions opts = {});

ExprPtr parse_expr(std::string_view text);

// Goals and terms resolve symbols against a signature environment.
Statement parse_goal(std::string_view text, const Signature& env);
Term parse_term(std::string_view text, const Signature& env,
                ParseOptions opts = {});

// `{f/1, g/2}` as a function signature (CLI flags).
FnSig parse_fnsig(std::string_view text);

// Registers every definition of a parsed file.
void add_to_env(FlattenEnv& env, const ParsedFile& file);

}  // namespace crwl
