// Model container:
//
//   somkit-model\n
//   format-version: 1\n
//   kind: rectangular|hexagonal\n
//   rows: <int>\n
//   cols: <int>\n
//   dim: <int>\n
//   metric: <name>\n
//   kernel: <name>\n
//   payload: f64le\n
//   \n
//   rows*cols*dim IEEE-754 doubles, little-endian, row-major neuron order.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "somkit/error.hpp"
#include "somkit/som.hpp"

namespace somkit {
namespace {

constexpr std::string_view kMagic = "somkit-model";

void put_f64le(std::string& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_f64le(std::string_view bytes, std::size_t at) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + b])) << (8 * b);
    }
    return std::bit_cast<double>(bits);
}

int parse_int(const std::string& key, const std::string& value, std::size_t offset) {
    try {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size() || v < 1 || v > 1'000'000) throw std::invalid_argument(value);
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw ParseError(fmt::format("invalid value '{}' for '{}'", value, key), offset);
    }
}

}  // namespace

std::string serialize_model(const SomModel& model) {
    const GridTopology& topo = model.topology();
    std::string out = fmt::format(
        "{}\nformat-version: {}\nkind: {}\nrows: {}\ncols: {}\ndim: {}\nmetric: {}\nkernel: {}\n"
        "payload: f64le\n\n",
        kMagic, kModelFormatVersion, to_string(topo.kind()), topo.rows(), topo.cols(), model.dim(),
        to_string(model.metric()), to_string(model.kernel()));
    out.reserve(out.size() + model.weights().data().size() * 8);
    for (double v : model.weights().data()) put_f64le(out, v);
    return out;
}

SomModel deserialize_model(std::string_view bytes) {
    std::size_t pos = 0;
    auto next_line = [&]() -> std::pair<std::string, std::size_t> {
        const std::size_t start = pos;
        const std::size_t nl = bytes.find('\n', pos);
        if (nl == std::string_view::npos) throw ParseError("truncated model header", bytes.size());
        pos = nl + 1;
        return {std::string(bytes.substr(start, nl - start)), start};
    };

    if (auto [magic, at] = next_line(); magic != kMagic) {
        throw ParseError("not a somkit model file", at);
    }
    std::map<std::string, std::pair<std::string, std::size_t>> fields;
    for (;;) {
        auto [line, at] = next_line();
        if (line.empty()) break;
        const auto colon = line.find(": ");
        if (colon == std::string::npos) throw ParseError(fmt::format("malformed header line '{}'", line), at);
        std::string key = line.substr(0, colon);
        if (fields.contains(key)) throw ParseError(fmt::format("duplicate header key '{}'", key), at);
        fields[key] = {line.substr(colon + 2), at + colon + 2};
        if (key == "format-version") {
            const std::string& v = fields[key].first;
            if (v != std::to_string(kModelFormatVersion)) {
                throw VersionError(fmt::format("unsupported model format version '{}' (expected {})", v,
                                               kModelFormatVersion));
            }
        }
    }
    const std::size_t header_end = pos;
    auto require = [&](const char* key) -> const std::pair<std::string, std::size_t>& {
        const auto it = fields.find(key);
        if (it == fields.end()) throw ParseError(fmt::format("missing header key '{}'", key), header_end);
        return it->second;
    };
    for (const auto& [key, value] : fields) {
        static const char* known[] = {"format-version", "kind", "rows", "cols", "dim", "metric", "kernel", "payload"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw ParseError(fmt::format("unknown header key '{}'", key), value.second);
        }
    }
    require("format-version");

    Topology kind{};
    Metric metric{};
    Kernel kernel{};
    try {
        kind = parse_topology(require("kind").first);
        metric = parse_metric(require("metric").first);
        kernel = parse_kernel(require("kernel").first);
    } catch (const ParameterError& e) {
        throw ParseError(e.what(), header_end);
    }
    const auto& [rows_s, rows_at] = require("rows");
    const auto& [cols_s, cols_at] = require("cols");
    const auto& [dim_s, dim_at] = require("dim");
    const int rows = parse_int("rows", rows_s, rows_at);
    const int cols = parse_int("cols", cols_s, cols_at);
    const int dim = parse_int("dim", dim_s, dim_at);
    if (const auto& [p, at] = require("payload"); p != "f64le") {
        throw ParseError(fmt::format("unsupported payload encoding '{}'", p), at);
    }

    const std::size_t payload = bytes.size() - header_end;
    if (payload % 8 != 0) {
        throw ParseError("payload ends inside a weight value", header_end + payload / 8 * 8);
    }
    const std::size_t expected = static_cast<std::size_t>(rows) * cols * dim;
    if (payload / 8 != expected) {
        throw ValidationError(fmt::format(
            "payload holds {} values but header declares {}x{}x{} = {}", payload / 8, rows, cols, dim,
            expected));
    }
    std::vector<double> w(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        w[i] = get_f64le(bytes, header_end + 8 * i);
        if (!std::isfinite(w[i])) throw ValidationError(fmt::format("non-finite weight at index {}", i));
    }
    GridTopology topo(kind, rows, cols);
    return SomModel(topo, Matrix(topo.size(), static_cast<std::size_t>(dim), std::move(w)), metric,
                    kernel);
}

void save_model(const SomModel& model, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError(fmt::format("cannot write '{}'", path.string()));
    const std::string bytes = serialize_model(model);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw InputError(fmt::format("failed writing '{}'", path.string()));
}

SomModel load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << f.rdbuf();
    return deserialize_model(ss.str());
}

}  // namespace somkit
