#include "fmpinn/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace fmpinn {

namespace {
constexpr char MAGIC[8] = {'F', 'M', 'P', 'N', '0', '0', '0', '1'};
}

void write_checkpoint(const std::string& path, const Parameters& params, std::uint64_t config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out.write(MAGIC, 8);
    out.write(reinterpret_cast<const char*>(&config_hash), 8);
    const std::int64_t count = params.count();
    out.write(reinterpret_cast<const char*>(&count), 8);
    out.write(reinterpret_cast<const char*>(params.values.data()),
              static_cast<std::streamsize>(params.values.size() * 8));
    if (!out) throw ConfigError("short write: " + path);

    nlohmann::ordered_json side;
    side["config_hash"] = config_hash;
    side["param_count"] = count;
    side["dim_in"] = params.config.dim_in;
    side["dim_out"] = params.config.dim_out;
    side["subnets"] = params.config.num_subnets();
    nlohmann::ordered_json shapes = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < params.layout.subnet.size(); ++s) {
        for (std::size_t l = 0; l < params.layout.subnet[s].size(); ++l) {
            const auto& L = params.layout.subnet[s][l];
            shapes.push_back({{"subnet", s},
                              {"layer", l},
                              {"rows", L.rows},
                              {"cols", L.cols},
                              {"w_offset", L.w_off},
                              {"b_offset", L.b_off}});
        }
    }
    if (params.layout.has_head) {
        const auto& H = params.layout.head;
        shapes.push_back({{"subnet", nullptr},
                          {"layer", "head"},
                          {"rows", H.rows},
                          {"cols", H.cols},
                          {"w_offset", H.w_off},
                          {"b_offset", H.b_off}});
    }
    side["shapes"] = std::move(shapes);
    std::ofstream sj(path + ".shapes.json");
    if (!sj) throw ConfigError("cannot open for writing: " + path + ".shapes.json");
    sj << side.dump(2) << "\n";
}

Parameters read_checkpoint(const std::string& path, const NetworkConfig& cfg,
                           std::uint64_t expected_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, MAGIC, 8) != 0)
        throw ConfigError(path + ": not a checkpoint file");
    std::uint64_t stored_hash = 0;
    std::int64_t count = 0;
    in.read(reinterpret_cast<char*>(&stored_hash), 8);
    in.read(reinterpret_cast<char*>(&count), 8);
    if (expected_hash != 0 && stored_hash != expected_hash)
        throw ConfigError(path + ": checkpoint config hash mismatch");

    Parameters p;
    p.config = cfg;
    p.layout = ParamLayout::build(cfg);
    if (count != p.layout.total)
        throw ConfigError(path + ": parameter count does not match the architecture");
    p.values.resize(static_cast<std::size_t>(count));
    in.read(reinterpret_cast<char*>(p.values.data()), static_cast<std::streamsize>(count * 8));
    if (!in) throw ConfigError(path + ": truncated checkpoint");
    return p;
}

}  // namespace fmpinn
