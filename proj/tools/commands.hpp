#pragma once

// Exit codes of the sasc command line tool.
namespace sasc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;      // usage, config, missing inputs
inline constexpr int kExitDegenerate = 2;  // constant module
inline constexpr int kExitBackend = 3;     // LLM/module backend or protocol failure

int run(int argc, char** argv);

}  // namespace sasc::cli
