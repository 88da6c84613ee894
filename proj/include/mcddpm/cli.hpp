#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mcddpm/config.hpp"
#include "mcddpm/error.hpp"

namespace mcddpm::cli {

/// 0 success, 1 user/config error, 2 I/O or file-format error, 3 internal invariant.
int exit_code(ErrorKind kind);

/// Entry point; args excludes the program name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

void cmd_gen_data(const RunConfig& config, std::ostream& out);
void cmd_make_mask(const RunConfig& config, std::ostream& out);
void cmd_train(const RunConfig& config, std::ostream& out);
void cmd_sample(const RunConfig& config, std::ostream& out);
void cmd_eval(const RunConfig& config, std::ostream& out);
void cmd_schedule_info(const RunConfig& config, std::ostream& out);

}  // namespace mcddpm::cli
