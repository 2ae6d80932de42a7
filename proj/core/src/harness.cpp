#include "mgomea/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>
#include <utility>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace mgomea {

namespace fs = std::filesystem;

namespace {

    std::string_view trim(std::string_view s)
    {
        auto const ws = " \t\r\n";
        auto b = s.find_first_not_of(ws);
        if (b == std::string_view::npos) {
            return {};
        }
        auto e = s.find_last_not_of(ws);
        return s.substr(b, e - b + 1);
    }

    std::vector<std::string> splitList(std::string_view s, char sep = ',')
    {
        std::vector<std::string> out;
        while (true) {
            auto pos = s.find(sep);
            auto item = trim(s.substr(0, pos));
            if (!item.empty()) {
                out.emplace_back(item);
            }
            if (pos == std::string_view::npos) {
                break;
            }
            s.remove_prefix(pos + 1);
        }
        return out;
    }

    template <typename T>
    T parseNumber(std::string_view key, std::string_view value)
    {
        T out {};
        auto v = trim(value);
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc {} || ptr != v.data() + v.size() || v.empty()) {
            throw ConfigError(fmt::format("{}: '{}' is not a valid number", key, value));
        }
        return out;
    }

    bool parseBool(std::string_view key, std::string_view value)
    {
        auto v = trim(value);
        if (v == "true" || v == "yes" || v == "on" || v == "1") {
            return true;
        }
        if (v == "false" || v == "no" || v == "off" || v == "0") {
            return false;
        }
        throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, value));
    }

    std::string joinObjectives(std::span<const ObjectiveKind> kinds, std::string_view sep)
    {
        std::string out;
        for (auto k : kinds) {
            if (!out.empty()) {
                out += sep;
            }
            out += objectiveName(k);
        }
        return out;
    }

    std::string quoteCsv(std::string_view s)
    {
        std::string out = "\"";
        for (auto c : s) {
            if (c == '"') {
                out += '"';
            }
            out += c;
        }
        out += '"';
        return out;
    }

    std::string readFile(const fs::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw std::runtime_error(fmt::format("cannot read {}", path.string()));
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::ofstream openOut(const fs::path& path)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error(fmt::format("cannot write {}", path.string()));
        }
        return out;
    }

    const std::set<std::string, std::less<>> ExperimentKeys { "datasets", "repetitions", "base_seed", "output", "jobs",
        "resume" };

} // namespace

// ---------------------------------------------------------------------------

DatasetRef parseDatasetRef(std::string_view text)
{
    auto t = trim(text);
    DatasetRef ref;
    if (t.starts_with("synth:")) {
        auto parts = splitList(t.substr(6), ':');
        if (parts.empty() || parts.size() > 3) {
            throw ConfigError(fmt::format("malformed dataset reference '{}'", text));
        }
        ref.kind = DatasetRef::Kind::Synthetic;
        ref.id = parseNumber<int>("dataset id", parts[0]);
        if (ref.id < 1 || ref.id > 5) {
            throw ConfigError(fmt::format("synthetic dataset id {} out of range 1..5", ref.id));
        }
        ref.label = fmt::format("synth{}", ref.id);
        if (parts.size() > 1) {
            ref.samples = parseNumber<std::size_t>("dataset samples", parts[1]);
            if (ref.samples < 2) {
                throw ConfigError("a synthetic dataset needs at least 2 samples");
            }
            if (ref.samples != DefaultSyntheticSamples) {
                ref.label += fmt::format("_n{}", ref.samples);
            }
        }
        if (parts.size() > 2) {
            ref.seed = parseNumber<std::uint64_t>("dataset seed", parts[2]);
            if (ref.seed != 0) {
                ref.label += fmt::format("_s{}", ref.seed);
            }
        }
        return ref;
    }
    if (t.starts_with("csv:")) {
        auto rest = t.substr(4);
        auto colon = rest.rfind(':');
        if (colon == std::string_view::npos || colon == 0 || colon + 1 == rest.size()) {
            throw ConfigError(fmt::format("malformed dataset reference '{}' (expected csv:path:target)", text));
        }
        ref.kind = DatasetRef::Kind::Csv;
        ref.path = std::string(rest.substr(0, colon));
        auto target = std::string(rest.substr(colon + 1));
        if (!target.empty() && std::all_of(target.begin(), target.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            ref.target = parseNumber<std::size_t>("target column", target);
        } else {
            ref.target = target;
        }
        ref.label = ref.path.stem().string();
        return ref;
    }
    throw ConfigError(fmt::format("unknown dataset reference '{}'", text));
}

Dataset loadDataset(const DatasetRef& ref)
{
    if (ref.kind == DatasetRef::Kind::Synthetic) {
        return generateSynthetic(ref.id, ref.samples, ref.seed);
    }
    return loadCsv(ref.path, ref.target);
}

// ---------------------------------------------------------------------------

void applyRunSetting(RunConfig& c, std::string_view rawKey, std::string_view rawValue)
{
    auto const key = trim(rawKey);
    auto const value = trim(rawValue);
    if (key == "mode") {
        auto m = parseMode(value);
        if (!m) {
            throw ConfigError(fmt::format("mode: expected so or mo, got '{}'", value));
        }
        c.mode = *m;
    } else if (key == "objectives") {
        c.objectives.clear();
        for (auto const& name : splitList(value)) {
            auto k = parseObjective(name);
            if (!k) {
                throw ConfigError(fmt::format("objectives: unknown objective '{}'", name));
            }
            c.objectives.push_back(*k);
        }
    } else if (key == "clustering") {
        auto s = parseStrategy(value);
        if (!s) {
            throw ConfigError(fmt::format("clustering: unknown strategy '{}'", value));
        }
        c.clustering = *s;
    } else if (key == "clusters") {
        c.clusters = parseNumber<std::size_t>(key, value);
    } else if (key == "population_size") {
        c.populationSize = parseNumber<std::size_t>(key, value);
    } else if (key == "tree_height") {
        c.genotype.treeHeight = parseNumber<int>(key, value);
    } else if (key == "tree_count") {
        c.genotype.treeCount = parseNumber<int>(key, value);
    } else if (key == "function_set") {
        c.genotype.operators.clear();
        for (auto const& name : splitList(value)) {
            auto op = parseOpcode(name);
            if (!op) {
                throw ConfigError(fmt::format("function_set: unknown operator '{}'", name));
            }
            c.genotype.operators.push_back(*op);
        }
    } else if (key == "subexpressions") {
        c.genotype.subexpressions = parseBool(key, value);
    } else if (key == "terminal_probability") {
        c.genotype.terminalProbability = parseNumber<double>(key, value);
    } else if (key == "constant_probability") {
        c.genotype.constantProbability = parseNumber<double>(key, value);
    } else if (key == "linear_scaling") {
        c.linearScaling = parseBool(key, value);
    } else if (key == "duplicate_mutation") {
        c.duplicateMutation = parseBool(key, value);
    } else if (key == "dedup_size") {
        c.dedupSize = parseBool(key, value);
    } else if (key == "time_budget") {
        c.timeBudget = parseNumber<double>(key, value);
    } else if (key == "max_generations") {
        c.maxGenerations = value == "none" ? std::numeric_limits<std::size_t>::max()
                                           : parseNumber<std::size_t>(key, value);
    } else if (key == "stagnation_limit") {
        c.stagnationLimit = parseNumber<std::size_t>(key, value);
    } else if (key == "seed") {
        c.seed = parseNumber<std::uint64_t>(key, value);
    } else if (key == "workers") {
        c.workers = parseNumber<std::size_t>(key, value);
    } else if (key.starts_with("hv_max_")) {
        auto k = parseObjective(key.substr(7));
        if (!k) {
            throw ConfigError(fmt::format("{}: unknown objective", key));
        }
        c.hypervolumeMax[*k] = parseNumber<double>(key, value);
    } else {
        throw ConfigError(fmt::format("unknown setting '{}'", key));
    }
}

std::string formatRunConfig(const RunConfig& c)
{
    std::string ops;
    for (auto op : c.genotype.operators) {
        if (!ops.empty()) {
            ops += ",";
        }
        ops += opcodeName(op);
    }
    std::string out;
    auto line = [&](std::string_view k, auto const& v) { out += fmt::format("{} = {}\n", k, v); };
    line("mode", modeName(c.mode));
    line("objectives", joinObjectives(c.objectives, ","));
    line("clustering", strategyName(c.clustering));
    line("clusters", c.clusters);
    line("population_size", c.populationSize);
    line("tree_height", c.genotype.treeHeight);
    line("tree_count", c.genotype.treeCount);
    line("function_set", ops);
    line("subexpressions", c.genotype.subexpressions);
    line("terminal_probability", c.genotype.terminalProbability);
    line("constant_probability", c.genotype.constantProbability);
    line("linear_scaling", c.linearScaling);
    line("duplicate_mutation", c.duplicateMutation);
    line("dedup_size", c.dedupSize);
    line("time_budget", c.timeBudget);
    if (c.maxGenerations == std::numeric_limits<std::size_t>::max()) {
        line("max_generations", "none");
    } else {
        line("max_generations", c.maxGenerations);
    }
    line("stagnation_limit", c.stagnationLimit);
    line("seed", c.seed);
    line("workers", c.workers);
    for (auto const& [k, v] : c.hypervolumeMax) {
        line(fmt::format("hv_max_{}", objectiveName(k)), v);
    }
    return out;
}

namespace {
    struct Setting {
        std::string key;
        std::string value;
        std::size_t line;
    };

    std::vector<std::pair<std::string, std::vector<Setting>>> parseSections(std::string_view text,
        std::vector<Setting>& globals)
    {
        std::vector<std::pair<std::string, std::vector<Setting>>> sections;
        std::size_t lineNo = 0;
        while (!text.empty()) {
            auto nl = text.find('\n');
            auto raw = text.substr(0, nl);
            text = nl == std::string_view::npos ? std::string_view {} : text.substr(nl + 1);
            ++lineNo;
            auto line = trim(raw);
            if (line.empty() || line.front() == '#' || line.front() == ';') {
                continue;
            }
            if (line.front() == '[') {
                if (line.back() != ']') {
                    throw ConfigError(fmt::format("line {}: unterminated section header", lineNo));
                }
                auto name = std::string(trim(line.substr(1, line.size() - 2)));
                auto ok = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
                });
                if (!ok) {
                    throw ConfigError(fmt::format("line {}: invalid configuration name '{}'", lineNo, name));
                }
                sections.emplace_back(std::move(name), std::vector<Setting> {});
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError(fmt::format("line {}: expected key = value", lineNo));
            }
            Setting s { std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), lineNo };
            if (sections.empty()) {
                globals.push_back(std::move(s));
            } else {
                sections.back().second.push_back(std::move(s));
            }
        }
        return sections;
    }
} // namespace

RunConfig parseRunConfig(std::string_view text)
{
    std::vector<Setting> globals;
    auto sections = parseSections(text, globals);
    if (!sections.empty()) {
        throw ConfigError("run configuration text must not contain sections");
    }
    RunConfig c;
    for (auto const& s : globals) {
        try {
            applyRunSetting(c, s.key, s.value);
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("line {}: {}", s.line, e.what()));
        }
    }
    return c;
}

ExperimentSpec parseExperimentSpec(std::string_view text)
{
    std::vector<Setting> globals;
    auto sections = parseSections(text, globals);

    ExperimentSpec spec;
    std::vector<Setting> runDefaults;
    bool outputSet = false;
    for (auto const& s : globals) {
        try {
            if (s.key == "datasets") {
                spec.datasets.clear();
                for (auto const& item : splitList(s.value)) {
                    spec.datasets.push_back(parseDatasetRef(item));
                }
            } else if (s.key == "repetitions") {
                spec.repetitions = parseNumber<std::size_t>(s.key, s.value);
            } else if (s.key == "base_seed") {
                spec.baseSeed = parseNumber<std::uint64_t>(s.key, s.value);
            } else if (s.key == "output") {
                spec.output = s.value;
                outputSet = true;
            } else if (s.key == "jobs") {
                spec.jobs = parseNumber<std::size_t>(s.key, s.value);
            } else if (s.key == "resume") {
                spec.resume = parseBool(s.key, s.value);
            } else {
                RunConfig probe;
                applyRunSetting(probe, s.key, s.value);
                runDefaults.push_back(s);
            }
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("line {}: {}", s.line, e.what()));
        }
    }
    if (!outputSet) {
        spec.output = defaultOutputRoot();
    }
    if (spec.repetitions < 1) {
        throw ConfigError("repetitions must be at least 1");
    }
    if (spec.jobs < 1) {
        throw ConfigError("jobs must be at least 1");
    }
    if (spec.datasets.empty()) {
        throw ConfigError("no datasets given");
    }
    if (sections.empty()) {
        throw ConfigError("no configurations given");
    }
    std::set<std::string> labels;
    for (auto const& d : spec.datasets) {
        if (!labels.insert(d.label).second) {
            throw ConfigError(fmt::format("dataset '{}' listed twice", d.label));
        }
    }

    std::set<std::string> names;
    for (auto const& [name, settings] : sections) {
        if (!names.insert(name).second) {
            throw ConfigError(fmt::format("configuration '{}' defined twice", name));
        }
        RunConfig c;
        bool clusteringSet = false;
        for (auto const* list : { &std::as_const(runDefaults), &settings }) {
            for (auto const& s : *list) {
                if (ExperimentKeys.contains(s.key)) {
                    throw ConfigError(fmt::format("line {}: '{}' is an experiment-level key", s.line, s.key));
                }
                try {
                    applyRunSetting(c, s.key, s.value);
                } catch (const ConfigError& e) {
                    throw ConfigError(fmt::format("line {}: {}", s.line, e.what()));
                }
                clusteringSet = clusteringSet || s.key == "clustering";
            }
        }
        if (!clusteringSet && c.mode == Mode::SingleObjective) {
            c.clustering = ClusteringStrategy::None;
        }
        try {
            validate(c);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(fmt::format("[{}]: {}", name, e.what()));
        }
        spec.configs.push_back({ name, std::move(c) });
    }
    return spec;
}

ExperimentSpec loadExperimentSpec(const fs::path& path)
{
    std::string text;
    try {
        text = readFile(path);
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }
    return parseExperimentSpec(text);
}

fs::path defaultOutputRoot()
{
    if (auto const* env = std::getenv("MGOMEA_OUTPUT_ROOT"); env != nullptr && *env != '\0') {
        return env;
    }
    return "mgomea-out";
}

fs::path runDirectory(const fs::path& output, std::string_view config, std::string_view dataset,
    std::size_t repetition)
{
    return output / std::string(config) / std::string(dataset) / fmt::format("rep{}", repetition);
}

// ---------------------------------------------------------------------------

void writeRunOutputs(const fs::path& dir, const RunConfig& config, const Dataset& data, const RunResult& result,
    const nlohmann::json& meta)
{
    fs::create_directories(dir);
    TemplateLayout const layout(config.genotype.treeHeight);
    auto const kinds = optimizedObjectives(config);

    openOut(dir / "config.txt") << formatRunConfig(config);
    {
        auto out = openOut(dir / "generations.jsonl");
        for (auto const& r : result.records) {
            out << toJson(r, kinds).dump() << '\n';
        }
    }
    {
        auto out = openOut(dir / "timing.csv");
        out << "generation,wall_seconds\n";
        for (auto const& r : result.records) {
            fmt::print(out, "{},{:.6f}\n", r.generation, r.wallSeconds);
        }
    }
    {
        auto front = reportingFront(result.archive, config, layout);
        auto const& members = result.archive.members();
        std::vector<std::size_t> order(members.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return front[a].values < front[b].values; });

        auto out = openOut(dir / "front.csv");
        out << joinObjectives(config.objectives, ",")
            << ",expression_size,dedup_size,uses,reuses,functional_reuses,expression\n";
        for (auto i : order) {
            auto const& g = members[i].genotype;
            for (auto v : front[i].values) {
                fmt::print(out, "{:.17g},", v);
            }
            auto const reuse = reuseReport(g, layout);
            fmt::print(out, "{},{},{},{},{},", expressionSize(g, layout), dedupSize(g, layout), reuse.uses,
                reuse.reuses, reuse.functionalReuses);
            out << quoteCsv(toModularInfix(g, layout, data.featureNames())) << '\n';
        }
    }

    auto info = meta;
    info["mode"] = std::string(modeName(config.mode));
    info["objectives"] = nlohmann::json::array();
    for (auto k : config.objectives) {
        info["objectives"].push_back(std::string(objectiveName(k)));
    }
    info["generations"] = result.generations();
    info["evaluations"] = result.evaluations;
    info["termination"] = std::string(terminationName(result.termination));
    auto const hv = result.records.empty() ? 0.0 : result.records.back().hypervolume;
    info["hypervolume"] = std::isfinite(hv) ? nlohmann::json(hv) : nlohmann::json(nullptr);
    openOut(dir / "run.json") << info.dump(2) << '\n';
}

ExperimentOutcome runExperiments(const ExperimentSpec& spec, std::ostream* log)
{
    std::mutex logMutex;
    auto say = [&](std::string const& msg) {
        if (log != nullptr) {
            std::scoped_lock lock(logMutex);
            *log << msg << '\n' << std::flush;
        }
    };

    std::vector<std::optional<Dataset>> datasets;
    std::vector<std::string> loadErrors;
    for (auto const& ref : spec.datasets) {
        try {
            datasets.emplace_back(loadDataset(ref));
            loadErrors.emplace_back();
        } catch (const std::exception& e) {
            datasets.emplace_back(std::nullopt);
            loadErrors.emplace_back(e.what());
            say(fmt::format("dataset {}: {}", ref.label, e.what()));
        }
    }

    struct Task {
        std::size_t config;
        std::size_t dataset;
        std::size_t repetition;
    };
    ExperimentOutcome outcome;
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < spec.configs.size(); ++c) {
        for (std::size_t d = 0; d < spec.datasets.size(); ++d) {
            for (std::size_t r = 0; r < spec.repetitions; ++r) {
                RunStatus s;
                s.config = spec.configs[c].name;
                s.dataset = spec.datasets[d].label;
                s.repetition = r;
                s.seed = spec.baseSeed + r;
                s.directory = runDirectory(spec.output, s.config, s.dataset, r);
                if (!datasets[d]) {
                    s.error = loadErrors[d];
                }
                outcome.runs.push_back(std::move(s));
                tasks.push_back({ c, d, r });
            }
        }
    }

    auto execute = [&](std::size_t t) {
        auto& status = outcome.runs[t];
        if (!datasets[tasks[t].dataset]) {
            return;
        }
        auto const& data = *datasets[tasks[t].dataset];
        auto config = spec.configs[tasks[t].config].run;
        config.seed = status.seed;
        auto const tag = fmt::format("{}/{}/rep{}", status.config, status.dataset, status.repetition);
        try {
            if (spec.resume && fs::exists(status.directory / "run.json")
                && readFile(status.directory / "config.txt") == formatRunConfig(config)) {
                status.ok = true;
                status.skipped = true;
                say(fmt::format("{}: complete, skipped", tag));
                return;
            }
            fs::remove_all(status.directory);
            auto result = run(config, data);
            nlohmann::json meta { { "config", status.config }, { "dataset", status.dataset },
                { "repetition", status.repetition }, { "seed", status.seed } };
            writeRunOutputs(status.directory, config, data, result, meta);
            status.ok = true;
            say(fmt::format("{}: {} generations, hypervolume {:.4f} ({})", tag, result.generations(),
                result.records.back().hypervolume, terminationName(result.termination)));
        } catch (const std::exception& e) {
            status.error = e.what();
            say(fmt::format("{}: failed: {}", tag, e.what()));
        }
    };

    std::atomic<std::size_t> next { 0 };
    auto worker = [&] {
        for (auto t = next++; t < tasks.size(); t = next++) {
            execute(t);
        }
    };
    if (spec.jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < spec.jobs; ++j) {
            pool.emplace_back(worker);
        }
    }

    for (auto const& s : outcome.runs) {
        if (!s.ok) {
            ++outcome.failures;
        }
    }
    if (outcome.failures < outcome.runs.size()) {
        summarize(spec.output);
        emitConvergence(spec.output);
    }
    return outcome;
}

// ---------------------------------------------------------------------------

HypervolumeSpec sharedHypervolumeSpec(std::span<const ObjectiveKind> kinds,
    std::span<const std::vector<ObjectiveVector>> fronts)
{
    HypervolumeSpec spec;
    for (std::size_t o = 0; o < kinds.size(); ++o) {
        ObjectiveRange r { maximizes(kinds[o]), 0.0, 1.0 };
        if (kinds[o] != ObjectiveKind::R2) {
            double hi = 0.0;
            for (auto const& front : fronts) {
                for (auto const& v : front) {
                    if (v.valid) {
                        hi = std::max(hi, v[o]);
                    }
                }
            }
            r.hi = hi > 0.0 ? hi : 1.0;
        }
        spec.ranges.push_back(r);
    }
    return spec;
}

namespace {
    std::vector<ObjectiveVector> readFront(const fs::path& path, std::span<const ObjectiveKind> kinds)
    {
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error(fmt::format("cannot read {}", path.string()));
        }
        auto const mask = maximizeMask(kinds);
        std::vector<ObjectiveVector> front;
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (trim(line).empty()) {
                continue;
            }
            ObjectiveVector v;
            v.maximizeMask = mask;
            std::string_view rest = line;
            for (std::size_t o = 0; o < kinds.size(); ++o) {
                auto comma = rest.find(',');
                v.values.push_back(parseNumber<double>("front value", rest.substr(0, comma)));
                rest.remove_prefix(comma + 1);
            }
            front.push_back(std::move(v));
        }
        return front;
    }

    std::vector<fs::path> completedRuns(const fs::path& output)
    {
        std::vector<fs::path> dirs;
        if (!fs::exists(output)) {
            return dirs;
        }
        for (auto const& entry : fs::recursive_directory_iterator(output)) {
            if (entry.is_regular_file() && entry.path().filename() == "run.json") {
                dirs.push_back(entry.path().parent_path());
            }
        }
        std::sort(dirs.begin(), dirs.end());
        return dirs;
    }
} // namespace

std::vector<RunSummary> summarize(const fs::path& output)
{
    std::vector<RunSummary> runs;
    for (auto const& dir : completedRuns(output)) {
        auto const info = nlohmann::json::parse(readFile(dir / "run.json"));
        RunSummary s;
        s.config = info.at("config").get<std::string>();
        s.dataset = info.at("dataset").get<std::string>();
        s.repetition = info.at("repetition").get<std::size_t>();
        s.seed = info.at("seed").get<std::uint64_t>();
        s.mode = info.at("mode").get<std::string>();
        for (auto const& name : info.at("objectives")) {
            s.objectives.push_back(*parseObjective(name.get<std::string>()));
        }
        s.generations = info.at("generations").get<std::size_t>();
        s.evaluations = info.at("evaluations").get<std::uint64_t>();
        s.termination = info.at("termination").get<std::string>();
        auto const& hv = info.at("hypervolume");
        s.hypervolumeRun = hv.is_null() ? std::numeric_limits<double>::quiet_NaN() : hv.get<double>();
        s.front = readFront(dir / "front.csv", s.objectives);
        runs.push_back(std::move(s));
    }
    std::sort(runs.begin(), runs.end(), [](const RunSummary& a, const RunSummary& b) {
        return std::tie(a.config, a.dataset, a.repetition) < std::tie(b.config, b.dataset, b.repetition);
    });

    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        groups[{ runs[i].dataset, joinObjectives(runs[i].objectives, ",") }].push_back(i);
    }
    for (auto const& [key, members] : groups) {
        std::vector<std::vector<ObjectiveVector>> fronts;
        for (auto i : members) {
            fronts.push_back(runs[i].front);
        }
        auto const& kinds = runs[members.front()].objectives;
        if (kinds.size() != 2) {
            for (auto i : members) {
                runs[i].hypervolumeShared = std::numeric_limits<double>::quiet_NaN();
            }
            continue;
        }
        auto const spec = sharedHypervolumeSpec(kinds, fronts);
        for (auto i : members) {
            runs[i].hypervolumeShared = hypervolume(runs[i].front, spec);
        }
    }

    fs::create_directories(output);
    {
        auto out = openOut(output / "summary.csv");
        out << "config,dataset,repetition,seed,mode,objectives,generations,evaluations,termination,front_size,"
               "hv_run,hv_shared\n";
        for (auto const& s : runs) {
            fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{:.17g},{:.17g}\n", s.config, s.dataset, s.repetition,
                s.seed, s.mode, joinObjectives(s.objectives, ";"), s.generations, s.evaluations, s.termination,
                s.front.size(), s.hypervolumeRun, s.hypervolumeShared);
        }
    }
    {
        std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> agg;
        for (auto const& s : runs) {
            auto& [shared, local] = agg[{ s.config, s.dataset }];
            shared.push_back(s.hypervolumeShared);
            local.push_back(s.hypervolumeRun);
        }
        auto out = openOut(output / "aggregate.csv");
        out << "config,dataset,runs,hv_shared_mean,hv_shared_std,hv_run_mean,hv_run_std\n";
        for (auto const& [key, values] : agg) {
            fmt::print(out, "{},{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", key.first, key.second, values.first.size(),
                mean(values.first), stddev(values.first), mean(values.second), stddev(values.second));
        }
    }
    return runs;
}

double median(std::vector<double> xs)
{
    if (xs.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(xs.begin(), xs.end());
    auto const n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

ComparisonReport wilcoxonHolm(std::span<const PairedSamples> samples, double alpha, Alternative alternative)
{
    ComparisonReport report;
    report.alpha = alpha;
    report.alternative = alternative;
    std::vector<double> pValues;
    for (auto const& s : samples) {
        ComparisonRow row;
        row.dataset = s.dataset;
        row.n = s.a.size();
        row.meanA = mean(s.a);
        row.stdA = stddev(s.a);
        row.meanB = mean(s.b);
        row.stdB = stddev(s.b);
        row.medianA = median(s.a);
        row.medianB = median(s.b);
        row.pValue = wilcoxonSignedRank(s.a, s.b, alternative).pValue;
        pValues.push_back(row.pValue);
        report.rows.push_back(std::move(row));
    }
    auto const sig = holm(pValues, alpha);
    for (std::size_t i = 0; i < sig.size(); ++i) {
        report.rows[i].significant = sig[i];
    }
    return report;
}

ComparisonReport compare(std::span<const RunSummary> runs, std::string_view configA, std::string_view configB,
    double alpha, Alternative alternative)
{
    std::map<std::string, std::map<std::size_t, std::pair<std::optional<double>, std::optional<double>>>> byDataset;
    std::optional<std::vector<ObjectiveKind>> kindsA;
    std::optional<std::vector<ObjectiveKind>> kindsB;
    for (auto const& r : runs) {
        if (r.config == configA) {
            byDataset[r.dataset][r.repetition].first = r.hypervolumeShared;
            kindsA = r.objectives;
        } else if (r.config == configB) {
            byDataset[r.dataset][r.repetition].second = r.hypervolumeShared;
            kindsB = r.objectives;
        }
    }
    if (!kindsA || !kindsB) {
        throw std::invalid_argument(
            fmt::format("no completed runs for '{}'", !kindsA ? configA : configB));
    }
    if (*kindsA != *kindsB) {
        throw std::invalid_argument("configurations optimize different objectives; hypervolumes are not comparable");
    }
    std::vector<PairedSamples> samples;
    for (auto const& [dataset, reps] : byDataset) {
        PairedSamples p;
        p.dataset = dataset;
        for (auto const& [rep, pair] : reps) {
            if (pair.first && pair.second) {
                p.a.push_back(*pair.first);
                p.b.push_back(*pair.second);
            }
        }
        if (!p.a.empty()) {
            samples.push_back(std::move(p));
        }
    }
    auto report = wilcoxonHolm(samples, alpha, alternative);
    report.configA = configA;
    report.configB = configB;
    return report;
}

void writeComparisonCsv(const ComparisonReport& report, const fs::path& path)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    auto out = openOut(path);
    out << "config_a,config_b,dataset,n,mean_a,std_a,median_a,mean_b,std_b,median_b,p_value,alternative,alpha,"
           "significant\n";
    for (auto const& r : report.rows) {
        fmt::print(out, "{},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{}\n",
            report.configA, report.configB, r.dataset, r.n, r.meanA, r.stdA, r.medianA, r.meanB, r.stdB, r.medianB,
            r.pValue, alternativeName(report.alternative), report.alpha, r.significant ? "yes" : "no");
    }
}

void emitConvergence(const fs::path& output)
{
    struct Trace {
        std::vector<double> hv; // index = generation
        std::vector<double> wall;
    };
    std::map<std::string, std::vector<Trace>> series;
    for (auto const& dir : completedRuns(output)) {
        auto const info = nlohmann::json::parse(readFile(dir / "run.json"));
        Trace t;
        std::istringstream gens(readFile(dir / "generations.jsonl"));
        std::string line;
        while (std::getline(gens, line)) {
            auto const rec = nlohmann::json::parse(line);
            auto const& hv = rec.at("hypervolume");
            t.hv.push_back(hv.is_null() ? std::numeric_limits<double>::quiet_NaN() : hv.get<double>());
        }
        std::istringstream timing(readFile(dir / "timing.csv"));
        std::getline(timing, line);
        while (std::getline(timing, line)) {
            auto comma = line.find(',');
            if (comma != std::string::npos) {
                t.wall.push_back(parseNumber<double>("wall time", std::string_view(line).substr(comma + 1)));
            }
        }
        auto name = fmt::format("{}/{}", info.at("config").get<std::string>(), info.at("dataset").get<std::string>());
        series[name].push_back(std::move(t));
    }

    auto emit = [](std::ostream& out, const std::string& name, std::size_t x, std::vector<double> const& values) {
        if (values.empty()) {
            return;
        }
        fmt::print(out, "{},{},{:.17g},{:.17g},{}\n", name, x, mean(values), stddev(values), values.size());
    };

    fs::create_directories(output);
    auto byGen = openOut(output / "convergence_generations.csv");
    auto byTime = openOut(output / "convergence_time.csv");
    byGen << "series,x,mean,std,n\n";
    byTime << "series,x,mean,std,n\n";
    for (auto const& [name, traces] : series) {
        std::size_t maxGen = 0;
        double maxWall = 0.0;
        for (auto const& t : traces) {
            maxGen = std::max(maxGen, t.hv.size());
            if (!t.wall.empty()) {
                maxWall = std::max(maxWall, t.wall.back());
            }
        }
        for (std::size_t g = 0; g < maxGen; ++g) {
            std::vector<double> values;
            for (auto const& t : traces) {
                if (g < t.hv.size() && std::isfinite(t.hv[g])) {
                    values.push_back(t.hv[g]);
                }
            }
            emit(byGen, name, g, values);
        }
        auto const buckets = static_cast<std::size_t>(std::ceil(maxWall));
        for (std::size_t x = 1; x <= std::max<std::size_t>(buckets, 1); ++x) {
            std::vector<double> values;
            for (auto const& t : traces) {
                if (t.wall.empty() || static_cast<double>(x) > std::ceil(t.wall.back()) + (t.wall.back() == 0.0)) {
                    continue;
                }
                double v = std::numeric_limits<double>::quiet_NaN();
                for (std::size_t g = 0; g < t.wall.size() && g < t.hv.size(); ++g) {
                    if (t.wall[g] <= static_cast<double>(x)) {
                        v = t.hv[g];
                    }
                }
                if (std::isfinite(v)) {
                    values.push_back(v);
                }
            }
            emit(byTime, name, x, values);
        }
    }
}

} // namespace mgomea
