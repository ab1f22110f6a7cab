#include "fewgraph/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fewgraph/errors.hpp"

namespace fewgraph {

namespace {
constexpr const char* kMagic = "FEWGRAPH-CKPT v1";

static_assert(sizeof(double) == 8);

bool little_endian() {
    const std::uint16_t probe = 1;
    unsigned char b;
    std::memcpy(&b, &probe, 1);
    return b == 1;
}
} // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint '" + path + "'");

    nlohmann::json meta;
    meta["max_timestamp"] = c.vocab.max_timestamp;
    meta["node_labels"] = c.vocab.node_labels;
    meta["edge_labels"] = c.vocab.edge_labels;
    meta["embed_dim"] = c.params.dims.embed;
    meta["hidden_dim"] = c.params.dims.hidden;
    meta["head_hidden_dim"] = c.params.dims.head_hidden;
    meta["seed"] = c.seed;
    meta["step"] = c.step;
    meta["max_train_edges"] = c.max_train_edges;

    auto named = named_tensor_list(const_cast<ModelParams&>(c.params));
    out << kMagic << '\n' << meta.dump() << '\n' << "TENSORS " << named.size() << '\n';
    for (auto& [name, tensor] : named) {
        out << name << ' ' << tensor->rows << ' ' << tensor->cols << '\n';
        if (little_endian()) {
            out.write(reinterpret_cast<const char*>(tensor->v.data()),
                      static_cast<std::streamsize>(tensor->v.size() * sizeof(double)));
        } else {
            for (double x : tensor->v) {
                unsigned char bytes[8];
                std::memcpy(bytes, &x, 8);
                for (int i = 7; i >= 0; --i) out.put(static_cast<char>(bytes[i]));
            }
        }
    }
    if (!out) throw DataError("checkpoint write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw DataError("'" + path + "' is not a checkpoint (bad magic)");
    if (!std::getline(in, line)) throw DataError("checkpoint header truncated");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint header is not valid JSON: ") + e.what());
    }

    Checkpoint c;
    c.vocab.max_timestamp = meta.at("max_timestamp").get<int>();
    c.vocab.node_labels = meta.at("node_labels").get<std::vector<std::string>>();
    c.vocab.edge_labels = meta.at("edge_labels").get<std::vector<std::string>>();
    ModelDims dims;
    dims.embed = meta.at("embed_dim").get<int>();
    dims.hidden = meta.at("hidden_dim").get<int>();
    dims.head_hidden = meta.at("head_hidden_dim").get<int>();
    c.seed = meta.at("seed").get<std::uint64_t>();
    c.step = meta.at("step").get<long>();
    c.max_train_edges = meta.at("max_train_edges").get<int>();
    c.params = ModelParams::create(c.vocab, dims);

    if (!std::getline(in, line)) throw DataError("checkpoint tensor table truncated");
    std::istringstream hdr(line);
    std::string tag;
    std::size_t count = 0;
    if (!(hdr >> tag >> count) || tag != "TENSORS") throw DataError("bad tensor table header");

    auto named = named_tensor_list(c.params);
    if (count != named.size()) throw DataError("checkpoint tensor count mismatch");
    for (std::size_t t = 0; t < count; ++t) {
        if (!std::getline(in, line)) throw DataError("checkpoint tensor header truncated");
        std::istringstream th(line);
        std::string name;
        int rows = 0, cols = 0;
        if (!(th >> name >> rows >> cols)) throw DataError("bad tensor header '" + line + "'");
        if (name != named[t].first || rows != named[t].second->rows || cols != named[t].second->cols)
            throw DataError("checkpoint tensor '" + name + "' does not match the declared shape");
        auto& v = named[t].second->v;
        if (little_endian()) {
            in.read(reinterpret_cast<char*>(v.data()),
                    static_cast<std::streamsize>(v.size() * sizeof(double)));
        } else {
            for (double& x : v) {
                unsigned char bytes[8];
                for (int i = 7; i >= 0; --i) bytes[i] = static_cast<unsigned char>(in.get());
                std::memcpy(&x, bytes, 8);
            }
        }
        if (!in) throw DataError("checkpoint tensor data truncated");
    }
    return c;
}

} // namespace fewgraph
