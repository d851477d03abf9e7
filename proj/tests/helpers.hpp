#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "crwl/parser.hpp"

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(CRWL_FIXTURE_DIR) + "/" + name);
  if (!in.good()) throw crwl::Error("missing fixture: " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline crwl::FlattenEnv load_env(std::initializer_list<const char*> files) {
  crwl::FlattenEnv env;
  for (const char* f : files)
    crwl::add_to_env(env, crwl::parse_file(read_fixture(f)));
  return env;
}

inline const crwl::Module& env_module(const crwl::FlattenEnv& env,
                                      const std::string& name) {
  auto it = env.modules.find(name);
  if (it == env.modules.end()) throw crwl::Error("no such module: " + name);
  return it->second;
}
