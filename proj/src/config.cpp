// SPDX-License-Identifier: Apache-2.0

#include "metastack/config.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace metastack
{

using nlohmann::json;

namespace
{

constexpr std::string_view kBundledDemo = R"({
  "geometry": {
    "antennas": 4,
    "antenna_spacing_wl": 0.5,
    "array_to_first_layer_wl": 0.5,
    "layer_spacing_wl": 0.5,
    "layers": 8,
    "cells": [12, 12],
    "cell_spacing_wl": 0.5,
    "carrier_frequency_hz": 28e9,
    "antenna_area_wl2": 0.25,
    "cell_area_wl2": 0.25
  },
  "device": {
    "layer_kinds": ["AC", "AC", "PC", "PC", "PC", "PC", "PC", "PC"],
    "gain_min_db": -22,
    "gain_max_db": 13,
    "passive_gain": 0.9
  },
  "training": {
    "pilot_symbols": 100,
    "iterations": 500,
    "step_size": 0.1,
    "optimizer": "adam"
  },
  "simulation": {
    "users": 4,
    "modulation": "qpsk",
    "ebn0_db": [0, 4, 8, 12, 16],
    "bits_per_user": 1000,
    "trials": 1000,
    "seed": 2024,
    "methods": ["no_sim", "model_based", "data_driven"],
    "model_based": "ideal"
  },
  "output": {
    "directory": "results",
    "name": "full_scale_qpsk"
  }
}
)";

// Walks a JSON object, rejecting keys that are never read.
class Block
{
public:
    Block(const json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ConfigSchemaError(path_ + ": expected an object");
    }

    bool has(const std::string &key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    template <class T>
    void read(const std::string &key, T &out)
    {
        seen_.insert(key);
        if (!has(key))
            return;
        try
        {
            out = j_.at(key).get<T>();
        }
        catch (const json::exception &)
        {
            throw ConfigSchemaError(name(key) + ": wrong type (" + std::string(j_.at(key).type_name()) + ")");
        }
    }

    template <class T>
    void read(const std::string &key, std::optional<T> &out)
    {
        seen_.insert(key);
        if (!has(key))
            return;
        T v{};
        read(key, v);
        out = v;
    }

    const json &raw(const std::string &key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    Block sub(const std::string &key)
    {
        seen_.insert(key);
        if (!has(key))
            return Block(json::object(), name(key));
        return Block(j_.at(key), name(key));
    }

    std::string name(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigSchemaError(name(it.key()) + ": unknown key");
    }

private:
    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class F>
auto rethrow_as_validation(const std::string &key, F &&f)
{
    try
    {
        return f();
    }
    catch (const ConfigError &e)
    {
        throw ConfigValidationError(key + ": " + e.what());
    }
}

void parse_geometry(Block b, GeometryParams &g, bool &layers_given)
{
    std::size_t layers = 0;
    std::vector<std::size_t> cells;
    std::vector<std::vector<std::size_t>> layer_cells;
    b.read("antennas", g.antennas);
    b.read("antenna_spacing_wl", g.antenna_spacing_wl);
    b.read("array_to_first_layer_wl", g.array_to_first_layer_wl);
    b.read("layer_spacing_wl", g.layer_spacing_wl);
    b.read("layers", layers);
    b.read("cells", cells);
    b.read("layer_cells", layer_cells);
    b.read("cell_spacing_wl", g.cell_spacing_wl);
    b.read("carrier_frequency_hz", g.carrier_frequency_hz);
    b.read("antenna_area_wl2", g.antenna_area_wl2);
    b.read("cell_area_wl2", g.cell_area_wl2);
    b.finish();

    layers_given = b.has("layers");
    if (!layer_cells.empty())
    {
        if (layers_given && layer_cells.size() != layers)
            throw ConfigValidationError("geometry.layer_cells has " + std::to_string(layer_cells.size()) +
                                        " entries but geometry.layers = " + std::to_string(layers));
        g.layer_cells.clear();
        for (const auto &c : layer_cells)
        {
            if (c.size() != 2)
                throw ConfigSchemaError("geometry.layer_cells: each entry must be [Qx, Qy]");
            g.layer_cells.emplace_back(c[0], c[1]);
        }
        layers_given = true;
        return;
    }
    if (!layers_given)
        throw ConfigValidationError("geometry.layers: required");
    if (cells.size() != 2)
        throw ConfigValidationError("geometry.cells: required as [Qx, Qy] when geometry.layer_cells is absent");
    g.layer_cells.assign(layers, {cells[0], cells[1]});
}

} // namespace

ExperimentConfig parse_config(std::string_view text)
{
    json root;
    const bool blank = text.find_first_not_of(" \t\r\n") == std::string_view::npos;
    if (blank)
        root = json::object();
    else
    {
        try
        {
            root = json::parse(text.begin(), text.end(), nullptr, true, true);
        }
        catch (const json::parse_error &e)
        {
            throw ConfigSchemaError(std::string("config is not valid JSON: ") + e.what());
        }
    }

    ExperimentConfig c;
    Block top(root, "");
    if (!top.has("geometry"))
        throw ConfigValidationError("geometry: required block is missing");

    bool layers_given = false;
    parse_geometry(top.sub("geometry"), c.geometry, layers_given);

    {
        Block b = top.sub("device");
        std::vector<std::string> kinds;
        b.read("layer_kinds", kinds);
        b.read("gain_min_db", c.device.bounds.min_db);
        b.read("gain_max_db", c.device.bounds.max_db);
        b.read("passive_gain", c.device.passive_gain);
        b.finish();
        for (const auto &k : kinds)
            c.device.layer_kinds.push_back(
                rethrow_as_validation("device.layer_kinds", [&] { return parse_layer_kind(k); }));
        if (kinds.empty())
        {
            // Default split: the first two layers active.
            for (std::size_t l = 0; l < c.geometry.layer_cells.size(); ++l)
                c.device.layer_kinds.push_back(l < 2 ? LayerKind::AmplitudeControlled : LayerKind::PhaseControlled);
        }
    }

    {
        Block b = top.sub("training");
        std::string optimizer(to_string(c.training.optimizer));
        b.read("pilot_symbols", c.training.pilot_symbols);
        b.read("iterations", c.training.iterations);
        b.read("step_size", c.training.step_size);
        b.read("optimizer", optimizer);
        b.finish();
        c.training.optimizer =
            rethrow_as_validation("training.optimizer", [&] { return parse_optimizer_kind(optimizer); });
    }

    {
        Block b = top.sub("fit");
        std::string optimizer(to_string(c.fit.optimizer));
        b.read("max_iterations", c.fit.max_iterations);
        b.read("tolerance", c.fit.tolerance);
        b.read("step_size", c.fit.step_size);
        b.read("optimizer", optimizer);
        b.read("match_scale", c.fit.match_scale);
        b.read("warn_threshold", c.fit.warn_threshold);
        b.finish();
        c.fit.optimizer = rethrow_as_validation("fit.optimizer", [&] { return parse_optimizer_kind(optimizer); });
    }

    {
        Block b = top.sub("simulation");
        SimulationConfig &s = c.simulation;
        std::string modulation(to_string(s.modulation));
        std::string realization(to_string(s.model_based));
        std::vector<std::string> methods;
        b.read("users", s.users);
        b.read("modulation", modulation);
        b.read("ebn0_db", s.ebn0_db);
        b.read("bits_per_user", s.bits_per_user);
        b.read("trials", s.trials);
        b.read("seed", s.seed);
        b.read("methods", methods);
        b.read("total_power", s.total_power);
        b.read("model_based", realization);
        b.read("radiated_power_cap", s.radiated_power_cap);
        b.read("failure_tolerance", s.failure_tolerance);
        b.finish();
        s.modulation = rethrow_as_validation("simulation.modulation", [&] { return parse_modulation(modulation); });
        s.model_based =
            rethrow_as_validation("simulation.model_based", [&] { return parse_realization(realization); });
        if (b.has("methods"))
        {
            s.methods.clear();
            for (const auto &m : methods)
                s.methods.push_back(rethrow_as_validation("simulation.methods", [&] { return parse_method(m); }));
        }
    }

    {
        Block b = top.sub("output");
        b.read("directory", c.output.directory);
        b.read("name", c.output.name);
        b.read("json", c.output.json);
        b.read("snapshots", c.output.snapshots);
        b.read("curves", c.output.curves);
        b.finish();
    }
    top.finish();

    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigFileError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate_config(const ExperimentConfig &c)
{
    const auto fail = [](const std::string &msg) { throw ConfigValidationError(msg); };
    const GeometryParams &g = c.geometry;
    const std::size_t layers = g.layer_cells.size();

    if (layers == 0)
        fail("geometry.layers: at least one layer is required");
    if (c.device.layer_kinds.size() != layers)
        fail("device.layer_kinds has " + std::to_string(c.device.layer_kinds.size()) +
             " entries but geometry.layers = " + std::to_string(layers));
    rethrow_as_validation("geometry", [&] { return SimGeometry::from_params(g), 0; });

    if (!(c.device.bounds.min_db <= c.device.bounds.max_db))
        fail("device.gain_min_db must not exceed device.gain_max_db");
    if (!(c.device.passive_gain > 0.0 && c.device.passive_gain <= 1.0))
        fail("device.passive_gain must lie in (0, 1]");

    const SimulationConfig &s = c.simulation;
    if (s.users == 0)
        fail("simulation.users must be positive");
    if (s.users > g.antennas)
        fail("simulation.users (" + std::to_string(s.users) + ") exceeds geometry.antennas (" +
             std::to_string(g.antennas) + ")");
    if (g.layer_cells.back().first * g.layer_cells.back().second < g.antennas)
        fail("geometry.layer_cells: the last layer needs at least geometry.antennas cells");
    if (s.ebn0_db.empty())
        fail("simulation.ebn0_db must not be empty");
    for (double e : s.ebn0_db)
        if (!std::isfinite(e))
            fail("simulation.ebn0_db entries must be finite");
    const unsigned m = Constellation(s.modulation).bits_per_symbol();
    if (s.bits_per_user == 0 || s.bits_per_user % m != 0)
        fail("simulation.bits_per_user must be a positive multiple of " + std::to_string(m) + " for " +
             std::string(to_string(s.modulation)));
    if (s.trials == 0)
        fail("simulation.trials must be positive");
    if (s.methods.empty())
        fail("simulation.methods must not be empty");
    if (s.total_power && !(*s.total_power > 0.0 && std::isfinite(*s.total_power)))
        fail("simulation.total_power must be positive");
    if (s.radiated_power_cap && !(*s.radiated_power_cap > 0.0))
        fail("simulation.radiated_power_cap must be positive");
    if (!(s.failure_tolerance >= 0.0 && s.failure_tolerance <= 1.0))
        fail("simulation.failure_tolerance must lie in [0, 1]");

    if (c.training.iterations == 0)
        fail("training.iterations must be positive");
    rethrow_as_validation("training", [&] {
        TrainingConfig t = c.training;
        t.validate(s.users);
        return 0;
    });
    if (!(c.fit.step_size > 0.0) || !(c.fit.tolerance >= 0.0))
        fail("fit.step_size must be positive and fit.tolerance nonnegative");
    if (c.output.name.empty())
        fail("output.name must not be empty");
}

namespace
{

json to_json(const ExperimentConfig &c, bool with_output)
{
    json j;
    const GeometryParams &g = c.geometry;
    json cells = json::array();
    for (const auto &[x, y] : g.layer_cells)
        cells.push_back({x, y});
    j["geometry"] = {{"antennas", g.antennas},
                     {"antenna_spacing_wl", g.antenna_spacing_wl},
                     {"array_to_first_layer_wl", g.array_to_first_layer_wl},
                     {"layer_spacing_wl", g.layer_spacing_wl},
                     {"layers", g.layer_cells.size()},
                     {"layer_cells", cells},
                     {"cell_spacing_wl", g.cell_spacing_wl},
                     {"carrier_frequency_hz", g.carrier_frequency_hz},
                     {"antenna_area_wl2", g.antenna_area_wl2},
                     {"cell_area_wl2", g.cell_area_wl2}};

    json kinds = json::array();
    for (auto k : c.device.layer_kinds)
        kinds.push_back(std::string(to_string(k)));
    j["device"] = {{"layer_kinds", kinds},
                   {"gain_min_db", c.device.bounds.min_db},
                   {"gain_max_db", c.device.bounds.max_db},
                   {"passive_gain", c.device.passive_gain}};

    j["training"] = {{"pilot_symbols", c.training.pilot_symbols},
                     {"iterations", c.training.iterations},
                     {"step_size", c.training.step_size},
                     {"optimizer", std::string(to_string(c.training.optimizer))}};

    j["fit"] = {{"max_iterations", c.fit.max_iterations},
                {"tolerance", c.fit.tolerance},
                {"step_size", c.fit.step_size},
                {"optimizer", std::string(to_string(c.fit.optimizer))},
                {"match_scale", c.fit.match_scale},
                {"warn_threshold", c.fit.warn_threshold}};

    const SimulationConfig &s = c.simulation;
    json methods = json::array();
    for (auto m : s.methods)
        methods.push_back(std::string(to_string(m)));
    j["simulation"] = {{"users", s.users},
                       {"modulation", std::string(to_string(s.modulation))},
                       {"ebn0_db", s.ebn0_db},
                       {"bits_per_user", s.bits_per_user},
                       {"trials", s.trials},
                       {"seed", s.seed},
                       {"methods", methods},
                       {"total_power", s.effective_total_power()},
                       {"model_based", std::string(to_string(s.model_based))},
                       {"radiated_power_cap", s.radiated_power_cap ? json(*s.radiated_power_cap) : json(nullptr)},
                       {"failure_tolerance", s.failure_tolerance}};

    if (with_output)
        j["output"] = {{"directory", c.output.directory},
                       {"name", c.output.name},
                       {"json", c.output.json},
                       {"snapshots", c.output.snapshots},
                       {"curves", c.output.curves}};
    return j;
}

} // namespace

std::string serialize_config(const ExperimentConfig &config)
{
    return to_json(config, true).dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig &config)
{
    const std::string text = to_json(config, false).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text)
    {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

bool operator==(const ExperimentConfig &a, const ExperimentConfig &b)
{
    return to_json(a, true) == to_json(b, true);
}

std::string_view bundled_demo_config()
{
    return kBundledDemo;
}

std::string serialize_device(const SimDevice &device)
{
    json layers = json::array();
    for (std::size_t l = 0; l < device.num_layers(); ++l)
    {
        const RVector a = device.amplitudes(l);
        const RVector p = device.phases(l);
        layers.push_back({{"kind", std::string(to_string(device.kind(l)))},
                          {"amplitudes", std::vector<double>(a.data(), a.data() + a.size())},
                          {"phases", std::vector<double>(p.data(), p.data() + p.size())}});
    }
    json j = {{"gain_min_db", device.bounds().min_db},
              {"gain_max_db", device.bounds().max_db},
              {"passive_gain", device.passive_gain()},
              {"layers", layers}};
    return j.dump() + "\n";
}

SimDevice deserialize_device(std::string_view text)
{
    try
    {
        const json j = json::parse(text.begin(), text.end());
        GainBounds bounds{j.at("gain_min_db").get<double>(), j.at("gain_max_db").get<double>()};
        std::vector<LayerKind> kinds;
        std::vector<RVector> amplitudes;
        std::vector<RVector> phases;
        for (const auto &layer : j.at("layers"))
        {
            kinds.push_back(parse_layer_kind(layer.at("kind").get<std::string>()));
            const auto a = layer.at("amplitudes").get<std::vector<double>>();
            const auto p = layer.at("phases").get<std::vector<double>>();
            amplitudes.push_back(Eigen::Map<const RVector>(a.data(), static_cast<Eigen::Index>(a.size())));
            phases.push_back(Eigen::Map<const RVector>(p.data(), static_cast<Eigen::Index>(p.size())));
        }
        return SimDevice::from_state(std::move(kinds), bounds, j.at("passive_gain").get<double>(), amplitudes,
                                     phases);
    }
    catch (const json::exception &e)
    {
        throw ConfigSchemaError(std::string("device snapshot: ") + e.what());
    }
}

} // namespace metastack
