#include "hharnet/run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hharnet/error.hpp"
#include "hharnet/rng.hpp"

namespace hharnet {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

/// key=value lines with '#' comments; later duplicates are a config error.
class FlatConfig {
public:
    explicit FlatConfig(const std::string& text) {
        std::istringstream is(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const std::string stripped = trim(line);
            if (stripped.empty() || stripped[0] == '#') continue;
            std::size_t eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
            const std::string key = trim(stripped.substr(0, eq));
            const std::string value = trim(stripped.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            if (values_.count(key))
                throw ConfigError("config: duplicate key '" + key + "'");
            values_[key] = value;
        }
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        const char* begin = it->second.c_str();
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin || *end != '\0')
            throw ConfigError("config key '" + key + "': bad number '" + it->second + "'");
        return v;
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        const char* begin = it->second.c_str();
        char* end = nullptr;
        unsigned long long v = std::strtoull(begin, &end, 10);
        if (end == begin || *end != '\0')
            throw ConfigError("config key '" + key + "': bad integer '" + it->second +
                              "'");
        return v;
    }

    bool get_bool(const std::string& key, bool fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        if (it->second == "true") return true;
        if (it->second == "false") return false;
        throw ConfigError("config key '" + key + "': expected true/false");
    }

    std::vector<std::size_t> get_sizes(const std::string& key,
                                       std::vector<std::size_t> fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        std::vector<std::size_t> out;
        std::istringstream is(it->second);
        std::string item;
        while (std::getline(is, item, ',')) {
            item = trim(item);
            if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
                throw ConfigError("config key '" + key + "': bad size list '" +
                                  it->second + "'");
            out.push_back(std::stoull(item));
        }
        return out;
    }

    void fail_on_unknown() const {
        for (const auto& [key, value] : values_) {
            if (!consumed_.count(key))
                throw ConfigError("config: unknown key '" + key + "'");
        }
    }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

void read_mlp_section(FlatConfig& cfg, const std::string& section, nn::MlpConfig& out) {
    out.hidden_dims = cfg.get_sizes(section + ".hidden_dims", out.hidden_dims);
    out.dropout_rate = cfg.get_double(section + ".dropout_rate", out.dropout_rate);
    out.learning_rate = cfg.get_double(section + ".learning_rate", out.learning_rate);
    out.batch_size = cfg.get_u64(section + ".batch_size", out.batch_size);
    out.max_epochs = cfg.get_u64(section + ".max_epochs", out.max_epochs);
    out.patience = cfg.get_u64(section + ".patience", out.patience);
    const std::string opt = cfg.get_string(
        section + ".optimizer", out.optimizer == nn::Optimizer::Adam ? "adam" : "sgd");
    if (opt == "adam")
        out.optimizer = nn::Optimizer::Adam;
    else if (opt == "sgd")
        out.optimizer = nn::Optimizer::Sgd;
    else
        throw ConfigError("config key '" + section + ".optimizer': unknown optimizer '" +
                          opt + "'");
}

}  // namespace

RunConfig RunConfig::defaults() {
    RunConfig c;
    c.children.assign(c.labels.parent_count(), nn::MlpConfig{});
    c.mlp64.hidden_dims = {64};
    c.derive_seeds();
    return c;
}

void RunConfig::derive_seeds() {
    split.seed = derive_seed(master_seed, seed_tag::kSplit);
    flat.seed = derive_seed(master_seed, seed_tag::kFlat);
    root.seed = derive_seed(master_seed, seed_tag::kRoot);
    for (std::size_t p = 0; p < children.size(); ++p)
        children[p].seed = derive_seed(master_seed, seed_tag::kChildFirst + p);
    mlp64.seed = derive_seed(master_seed, seed_tag::kMlp64);
    forest.seed = derive_seed(master_seed, seed_tag::kForest);
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig out = defaults();
    FlatConfig cfg(text);

    out.manifest = cfg.get_string("manifest", out.manifest);
    out.master_seed = cfg.get_u64("seed", out.master_seed);
    out.standardize = cfg.get_bool("standardize", out.standardize);
    out.output_dir = cfg.get_string("output_dir", out.output_dir);

    out.labels.feature_count =
        cfg.get_u64("labels.feature_count", out.labels.feature_count);
    for (std::size_t t = 0; t < out.labels.leaf_count(); ++t) {
        // labels.leaf0 = display name|label:SOURCE_COLUMN
        const std::string key = "labels.leaf" + std::to_string(t);
        const std::string value = cfg.get_string(key, "");
        if (value.empty()) continue;
        std::size_t bar = value.find('|');
        if (bar == std::string::npos)
            throw ConfigError("config key '" + key + "': expected 'name|column'");
        out.labels.leaf_labels[t].display_name = trim(value.substr(0, bar));
        out.labels.leaf_labels[t].source_column = trim(value.substr(bar + 1));
    }
    out.labels.validate();

    out.split.train_fraction =
        cfg.get_double("split.train_fraction", out.split.train_fraction);
    out.split.val_fraction_of_train =
        cfg.get_double("split.val_fraction_of_train", out.split.val_fraction_of_train);

    read_mlp_section(cfg, "flat", out.flat);
    read_mlp_section(cfg, "root", out.root);
    for (std::size_t p = 0; p < out.children.size(); ++p)
        read_mlp_section(cfg, "child" + std::to_string(p), out.children[p]);
    read_mlp_section(cfg, "mlp64", out.mlp64);

    out.knn_k = cfg.get_u64("knn.k", out.knn_k);
    out.knn_threads = cfg.get_u64("knn.threads", out.knn_threads);
    out.tree_max_depth = cfg.get_u64("tree.max_depth", out.tree_max_depth);
    out.forest.n_trees = cfg.get_u64("forest.n_trees", out.forest.n_trees);
    out.forest.max_depth = cfg.get_u64("forest.max_depth", out.forest.max_depth);
    out.forest.bootstrap = cfg.get_bool("forest.bootstrap", out.forest.bootstrap);
    out.forest.mtry = cfg.get_u64("forest.mtry", out.forest.mtry);

    out.bootstrap_resamples =
        cfg.get_u64("bootstrap.resamples", out.bootstrap_resamples);
    out.gridsearch_exhaustive =
        cfg.get_bool("gridsearch.exhaustive", out.gridsearch_exhaustive);

    out.synth.samples_per_class =
        cfg.get_u64("synth.samples_per_class", out.synth.samples_per_class);
    out.synth.users = cfg.get_u64("synth.users", out.synth.users);
    out.synth.center_scale = cfg.get_double("synth.center_scale", out.synth.center_scale);
    out.synth.noise_std = cfg.get_double("synth.noise_std", out.synth.noise_std);
    out.synth.missing_feature_rate =
        cfg.get_double("synth.missing_feature_rate", out.synth.missing_feature_rate);
    out.synth.no_label_rate = cfg.get_double("synth.no_label_rate", out.synth.no_label_rate);
    out.synth.conflict_rate = cfg.get_double("synth.conflict_rate", out.synth.conflict_rate);
    out.synth.seed = cfg.get_u64("synth.seed", out.synth.seed);

    cfg.fail_on_unknown();

    out.derive_seeds();
    out.config_hash = fnv1a64(text);
    return out;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

}  // namespace hharnet
