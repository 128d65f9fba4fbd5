#pragma once

#include <filesystem>
#include <string>

#include "somkit/config.hpp"

namespace somkit::cli {

struct Context {
    RunConfig cfg;
    std::filesystem::path out_dir;
    bool quiet = false;

    /// <out>/<run-id>_<type>.<ext>
    std::filesystem::path artifact(const std::string& type, const std::string& ext) const;
};

void cmd_train(const Context& ctx);
void cmd_map(const Context& ctx);
void cmd_cluster(const Context& ctx);
void cmd_collect(const Context& ctx);
void cmd_bench(const Context& ctx);

}  // namespace somkit::cli
