#include "mgomea/engine.hpp"

#include "mgomea/linkage.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <set>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace mgomea {

std::string_view modeName(Mode m)
{
    return m == Mode::SingleObjective ? "so" : "mo";
}

std::optional<Mode> parseMode(std::string_view name)
{
    if (name == "so") {
        return Mode::SingleObjective;
    }
    if (name == "mo") {
        return Mode::MultiObjective;
    }
    return std::nullopt;
}

std::string_view terminationName(Termination t)
{
    switch (t) {
    case Termination::TimeBudget: return "time_budget";
    case Termination::Stagnation: return "stagnation";
    case Termination::GenerationLimit: return "generation_limit";
    }
    return "?";
}

void validate(const RunConfig& config)
{
    auto fail = [](std::string msg) { throw std::invalid_argument(std::move(msg)); };
    auto const& objs = config.objectives;
    if (objs.empty() || objs.size() > 32) {
        fail("objective list must hold between 1 and 32 objectives");
    }
    if (std::set<ObjectiveKind>(objs.begin(), objs.end()).size() != objs.size()) {
        fail("objective list contains duplicates");
    }
    if (config.populationSize == 0) {
        fail("population size must be positive");
    }
    if (config.workers == 0) {
        fail("worker count must be positive");
    }
    if (config.genotype.treeCount < 1 || config.genotype.treeHeight < 0 || config.genotype.treeHeight > 12) {
        fail("invalid template dimensions");
    }
    if (config.genotype.operators.empty()) {
        fail("function set is empty");
    }
    if (!config.linearScaling && std::find(objs.begin(), objs.end(), ObjectiveKind::LSRegularizer) != objs.end()) {
        fail("ls_regularizer requires linear scaling");
    }
    if (std::find(objs.begin(), objs.end(), ObjectiveKind::DedupSize) != objs.end()) {
        fail("select de-duplicated size with the dedup flag, not in the objective list");
    }
    if (config.dedupSize && std::find(objs.begin(), objs.end(), ObjectiveKind::Size) == objs.end()) {
        fail("the dedup flag needs size in the objective list");
    }
    if (config.timeBudget < 0.0) {
        fail("time budget must be non-negative");
    }

    if (config.mode == Mode::SingleObjective) {
        if (objs.front() != ObjectiveKind::R2) {
            fail("single-objective mode optimizes r2; list it first");
        }
        if (config.clustering != ClusteringStrategy::None) {
            fail(fmt::format("clustering '{}' set in single-objective mode", strategyName(config.clustering)));
        }
        return;
    }
    if (objs.size() != 2) {
        fail("multi-objective mode needs exactly two objectives");
    }
    if (config.clustering != ClusteringStrategy::None) {
        if (config.clusters == 0) {
            fail("cluster count must be positive");
        }
        if (config.clustering == ClusteringStrategy::Bkmrr && config.clusters < objs.size() + 1) {
            fail(fmt::format("bkmrr needs k >= {} for {} objectives", objs.size() + 1, objs.size()));
        }
        if (config.populationSize < config.clusters) {
            fail("population smaller than the cluster count");
        }
    }
}

std::vector<ObjectiveKind> optimizedObjectives(const RunConfig& config)
{
    auto kinds = config.objectives;
    if (config.dedupSize) {
        for (auto& k : kinds) {
            if (k == ObjectiveKind::Size) {
                k = ObjectiveKind::DedupSize;
            }
        }
    }
    return kinds;
}

GenotypeConfig genotypeFor(const RunConfig& config, const Dataset& data)
{
    auto g = config.genotype;
    auto const stats = targetStats(data);
    g.featureCount = data.cols();
    g.constMin = stats.minTarget;
    g.constMax = stats.maxTarget;
    return g;
}

HypervolumeSpec hypervolumeSpecFor(const RunConfig& config, const Dataset& data)
{
    auto const gcfg = genotypeFor(config, data);
    auto const sizeMax = maxExpressionSize(gcfg);
    HypervolumeSpec spec;
    for (auto k : config.objectives) {
        ObjectiveRange r { maximizes(k), 0.0, 1.0 };
        switch (k) {
        case ObjectiveKind::R2: r.hi = 1.0; break;
        case ObjectiveKind::Size:
        case ObjectiveKind::DedupSize:
        case ObjectiveKind::CosineCount: r.hi = sizeMax; break;
        case ObjectiveKind::MaxError: {
            auto const s = targetStats(data);
            r.hi = s.maxTarget > s.minTarget ? s.maxTarget - s.minTarget : 1.0;
            break;
        }
        case ObjectiveKind::OperatorComplexity: r.hi = 1e6; break;
        case ObjectiveKind::LSRegularizer: r.hi = 10.0; break;
        }
        if (auto it = config.hypervolumeMax.find(k); it != config.hypervolumeMax.end()) {
            r.hi = it->second;
        }
        spec.ranges.push_back(r);
    }
    return spec;
}

std::optional<Termination> shouldTerminate(std::size_t generation, std::size_t unchangedGenerations,
    double elapsedSeconds, const RunConfig& config)
{
    if (unchangedGenerations >= config.stagnationLimit) {
        return Termination::Stagnation;
    }
    if (generation >= config.maxGenerations) {
        return Termination::GenerationLimit;
    }
    if (elapsedSeconds >= config.timeBudget) {
        return Termination::TimeBudget;
    }
    return std::nullopt;
}

nlohmann::json toJson(const GenerationRecord& r, std::span<const ObjectiveKind> kinds)
{
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json best = nlohmann::json::object();
    for (std::size_t o = 0; o < kinds.size(); ++o) {
        best[std::string(objectiveName(kinds[o]))] = o < r.best.size() ? num(r.best[o]) : nlohmann::json(nullptr);
    }
    return nlohmann::json::object({
        { "generation", r.generation },
        { "hypervolume", num(r.hypervolume) },
        { "best", best },
        { "evaluations", r.evaluations },
        { "archive_size", r.archiveSize },
        { "unchanged_generations", r.unchangedGenerations },
        { "fos_families", r.fosFamilies },
    });
}

std::vector<ObjectiveVector> reportingFront(const ElitistArchive& archive, const RunConfig& config,
    const TemplateLayout& layout)
{
    std::vector<ObjectiveVector> out;
    out.reserve(archive.size());
    auto const kinds = optimizedObjectives(config);
    for (auto const& m : archive.members()) {
        auto v = m.objectives;
        v.maximizeMask = maximizeMask(config.objectives);
        for (std::size_t o = 0; o < kinds.size(); ++o) {
            if (kinds[o] == ObjectiveKind::DedupSize) {
                v.values[o] = static_cast<double>(expressionSize(m.genotype, layout));
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

namespace {

    // Stream tags for deriveSeed(seed, generation, tag).
    constexpr std::uint64_t GenerationStream = 0;
    constexpr std::uint64_t DuplicateStream = 1;
    constexpr std::uint64_t IndividualStream = 2; // + individual index

    class Engine {
    public:
        Engine(const RunConfig& config, const Dataset& data, const RunHooks& hooks)
            : config_(checked(config))
            , data_(data)
            , hooks_(hooks)
            , genotype_(genotypeFor(config, data))
            , layout_(config.genotype.treeHeight)
            , kinds_(optimizedObjectives(config))
            , hvSpec_(hypervolumeSpecFor(config, data))
            , start_(std::chrono::steady_clock::now())
        {
            auto const workers = std::max<std::size_t>(1, std::min(config.workers, config.populationSize));
            for (std::size_t w = 0; w < workers; ++w) {
                evaluators_.push_back(
                    std::make_unique<ObjectiveEvaluator>(data_, layout_, kinds_, config.linearScaling));
            }
            auto deadline = std::chrono::steady_clock::time_point::max();
            if (config.timeBudget < 1e9) {
                deadline = start_
                    + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(config.timeBudget));
            }
            for (auto& e : evaluators_) {
                contexts_.push_back({ &genotype_, &layout_, e.get(), hooks.gomObserver, deadline });
            }
        }

        RunResult run()
        {
            initialize();
            std::size_t generation = 0;
            record(generation, 0, nullptr, nullptr);
            while (true) {
                if (auto t = shouldTerminate(generation, archive_.unchangedGenerations(), elapsed(), config_)) {
                    result_.termination = *t;
                    break;
                }
                ++generation;
                if (config_.mode == Mode::SingleObjective) {
                    stepSo(generation);
                } else {
                    stepMo(generation);
                }
            }
            result_.archive = archive_;
            result_.population = std::move(population_);
            result_.evaluations = evaluations();
            return std::move(result_);
        }

    private:
        static const RunConfig& checked(const RunConfig& config)
        {
            validate(config);
            return config;
        }

        double elapsed() const
        {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        }

        std::uint64_t evaluations() const
        {
            std::uint64_t total = 0;
            for (auto const& e : evaluators_) {
                total += e->evaluations();
            }
            return total;
        }

        template <typename Fn>
        void parallelFor(std::size_t n, Fn&& fn)
        {
            if (contexts_.size() == 1) {
                for (std::size_t i = 0; i < n; ++i) {
                    fn(contexts_.front(), i);
                }
                return;
            }
            std::atomic<std::size_t> next { 0 };
            std::exception_ptr error;
            std::mutex errorMutex;
            {
                std::vector<std::jthread> threads;
                for (auto& ctx : contexts_) {
                    threads.emplace_back([&, ctxp = &ctx] {
                        try {
                            for (auto i = next++; i < n; i = next++) {
                                fn(*ctxp, i);
                            }
                        } catch (...) {
                            std::scoped_lock lock(errorMutex);
                            if (!error) {
                                error = std::current_exception();
                            }
                            next = n;
                        }
                    });
                }
            }
            if (error) {
                std::rethrow_exception(error);
            }
        }

        void initialize()
        {
            Rng rng(deriveSeed(config_.seed, 0, GenerationStream));
            auto genotypes = initializePopulation(config_.populationSize, genotype_, layout_, rng);
            population_.resize(genotypes.size());
            for (std::size_t i = 0; i < genotypes.size(); ++i) {
                population_[i].genotype = std::move(genotypes[i]);
            }
            parallelFor(population_.size(),
                [&](VariationContext& ctx, std::size_t i) { evaluate(population_[i], *ctx.evaluator); });
            if (config_.mode == Mode::MultiObjective || hooks_.recordArchive) {
                offerPopulation();
            }
        }

        void offerPopulation()
        {
            for (auto const& ind : population_) {
                archive_.tryAdd(ind.objectives, ind.genotype);
            }
            archive_.rebuildGrid();
        }

        void record(std::size_t generation, std::size_t fosFamilies, const std::vector<Individual>* previous,
            const ClusteringResult* clustering)
        {
            GenerationRecord r;
            r.generation = generation;
            r.wallSeconds = elapsed();
            r.evaluations = evaluations();
            r.archiveSize = archive_.size();
            r.unchangedGenerations = archive_.unchangedGenerations();
            r.fosFamilies = fosFamilies;
            r.best.assign(kinds_.size(), std::numeric_limits<double>::quiet_NaN());
            for (auto const& ind : population_) {
                if (!ind.objectives.valid) {
                    continue;
                }
                for (std::size_t o = 0; o < kinds_.size(); ++o) {
                    auto v = ind.objectives[o];
                    if (std::isnan(r.best[o]) || ind.objectives.better(o, v, r.best[o])) {
                        r.best[o] = v;
                    }
                }
            }
            if (hvSpec_.ranges.size() == 2) {
                auto front = reportingFront(archive_, config_, layout_);
                r.hypervolume = hypervolume(front, hvSpec_);
            } else {
                r.hypervolume = std::numeric_limits<double>::quiet_NaN();
            }
            result_.records.push_back(std::move(r));
            if (hooks_.onGeneration) {
                hooks_.onGeneration({ generation, population_, previous, clustering, archive_ });
            }
        }

        static std::vector<const Genotype*> genotypesOf(const std::vector<const Individual*>& inds)
        {
            std::vector<const Genotype*> out;
            out.reserve(inds.size());
            for (auto const* ind : inds) {
                out.push_back(&ind->genotype);
            }
            return out;
        }

        Fos shuffled(const Fos& fos, Rng& rng)
        {
            auto order = fos;
            rng.shuffle(std::span<FosSubset>(order));
            return order;
        }

        void stepSo(std::size_t generation)
        {
            auto const previous = population_;
            std::vector<const Individual*> donors;
            donors.reserve(previous.size());
            for (auto const& ind : previous) {
                donors.push_back(&ind);
            }
            auto const fos = learnFos(genotypesOf(donors), genotype_.treeCount);
            AcceptanceRule const rule = SingleObjectiveRule { 0 };

            parallelFor(population_.size(), [&](VariationContext& ctx, std::size_t i) {
                Rng rng(deriveSeed(config_.seed, generation, IndividualStream + i));
                auto order = shuffled(fos, rng);
                population_[i] = gom(previous[i], order, donors, rule, rng, ctx);
                mutateCoefficients(population_[i], rule, rng, ctx);
            });
            if (config_.duplicateMutation) {
                Rng rng(deriveSeed(config_.seed, generation, DuplicateStream));
                mutateDuplicates(population_, rng, contexts_.front());
            }
            if (hooks_.recordArchive) {
                offerPopulation();
            }
            record(generation, static_cast<std::size_t>(genotype_.treeCount), &previous, nullptr);
        }

        void stepMo(std::size_t generation)
        {
            Rng rng(deriveSeed(config_.seed, generation, GenerationStream));
            if (config_.duplicateMutation) {
                Rng dup(deriveSeed(config_.seed, generation, DuplicateStream));
                mutateDuplicates(population_, dup, contexts_.front());
            }

            std::vector<ObjectiveVector> objectives;
            objectives.reserve(population_.size());
            for (auto const& ind : population_) {
                objectives.push_back(ind.objectives);
            }
            auto const clustering = cluster(config_.clustering, objectives, config_.clusters, rng);

            auto const previous = population_;
            std::vector<std::vector<const Individual*>> donors(clustering.clusters.size());
            std::vector<Fos> fos(clustering.clusters.size());
            std::vector<AcceptanceRule> rules(clustering.clusters.size());
            for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
                auto const& cl = clustering.clusters[c];
                if (cl.donors.empty()) {
                    for (auto const& ind : previous) {
                        donors[c].push_back(&ind);
                    }
                } else {
                    for (auto i : cl.donors) {
                        donors[c].push_back(&previous[i]);
                    }
                }
                fos[c] = learnFos(genotypesOf(donors[c]), genotype_.treeCount);
                if (cl.isExtreme()) {
                    rules[c] = SingleObjectiveRule { static_cast<std::size_t>(cl.extremeObjective) };
                } else {
                    rules[c] = MultiObjectiveRule { &archive_ };
                }
            }

            parallelFor(population_.size(), [&](VariationContext& ctx, std::size_t i) {
                Rng local(deriveSeed(config_.seed, generation, IndividualStream + i));
                auto const c = clustering.assignment[i];
                auto order = shuffled(fos[c], local);
                population_[i] = gom(previous[i], order, donors[c], rules[c], local, ctx);
                population_[i].cluster = static_cast<int>(c);
                mutateCoefficients(population_[i], rules[c], local, ctx);
            });
            offerPopulation();
            record(generation, clustering.clusters.size() * static_cast<std::size_t>(genotype_.treeCount), &previous,
                &clustering);
        }

        const RunConfig& config_;
        const Dataset& data_;
        const RunHooks& hooks_;
        GenotypeConfig genotype_;
        TemplateLayout layout_;
        std::vector<ObjectiveKind> kinds_;
        HypervolumeSpec hvSpec_;
        std::chrono::steady_clock::time_point start_;
        std::vector<std::unique_ptr<ObjectiveEvaluator>> evaluators_;
        std::vector<VariationContext> contexts_;
        ElitistArchive archive_;
        std::vector<Individual> population_;
        RunResult result_;
    };

} // namespace

RunResult runSo(const RunConfig& config, const Dataset& data, const RunHooks& hooks)
{
    if (config.mode != Mode::SingleObjective) {
        throw std::invalid_argument("runSo called with a multi-objective configuration");
    }
    return Engine(config, data, hooks).run();
}

RunResult runMo(const RunConfig& config, const Dataset& data, const RunHooks& hooks)
{
    if (config.mode != Mode::MultiObjective) {
        throw std::invalid_argument("runMo called with a single-objective configuration");
    }
    return Engine(config, data, hooks).run();
}

RunResult run(const RunConfig& config, const Dataset& data, const RunHooks& hooks)
{
    return config.mode == Mode::SingleObjective ? runSo(config, data, hooks) : runMo(config, data, hooks);
}

} // namespace mgomea
