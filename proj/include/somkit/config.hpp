#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "somkit/bench.hpp"
#include "somkit/data.hpp"
#include "somkit/render.hpp"
#include "somkit/som.hpp"

namespace somkit {

/// Flat dotted-key configuration (e.g. train.epochs). Every key has a
/// default; setting an unknown key throws ConfigurationError.
class RunConfig {
public:
    RunConfig();

    void set(const std::string& key, const std::string& value);
    const std::string& get(const std::string& key) const;
    bool contains(const std::string& key) const { return values_.contains(key); }
    std::vector<std::string> keys() const;

    /// "key = value" lines; lines starting with '#' and blank lines are skipped.
    void merge_text(const std::string& text, const std::string& source = "<config>");
    void merge_file(const std::filesystem::path& path);
    /// Sorted "key = value" lines, readable by merge_text.
    std::string to_text() const;

    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<std::size_t> get_sizes(const std::string& key) const;  // comma-separated

private:
    std::map<std::string, std::string> values_;
};

TrainConfig train_config(const RunConfig& cfg);
BlobSpec blob_spec(const RunConfig& cfg);
BenchPlan bench_plan(const RunConfig& cfg);
RenderStyle render_style(const RunConfig& cfg);
GridTopology som_topology(const RunConfig& cfg);

}  // namespace somkit
