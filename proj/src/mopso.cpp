#include "lrpopt/mopso.hpp"

#include "lrpopt/assign.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace lrpopt {

namespace {

enum StreamTag : std::uint64_t { kInitStream = 1, kStepStream = 2 };

}  // namespace

Problem::Problem(RoomModel room_model, ObjectiveConfig objective_cfg, RepairConfig repair_cfg)
    : room(std::move(room_model)), grid(Grid::build(room)), objective(objective_cfg), repair(repair_cfg)
{
}

bool dominates(const Objectives& a, const Objectives& b)
{
    return a.f1 <= b.f1 && a.f2 <= b.f2 && (a.f1 < b.f1 || a.f2 < b.f2);
}

void PsoConfig::validate() const
{
    auto check_range = [](Range r, const char* name) {
        if (!(r.lo <= r.hi)) throw Error(std::string(name) + " range is empty");
    };
    check_range(w, "W");
    check_range(c1, "C1");
    check_range(c2, "C2");
    if (!(p_up >= 0.0 && p_up <= 1.0 && p_down >= 0.0 && p_down <= 1.0 && p_up + p_down <= 1.0)) {
        throw Error("mutation probabilities must lie in [0, 1] and sum to at most 1");
    }
    if (swarm_size == 0) throw Error("swarm_size must be positive");
    if (m_init_min == 0 || m_init_min > m_init_max) throw Error("initial reflector range is empty");
    if (archive_capacity == 0) throw Error("archive capacity must be positive");
    if (v_max < 0.0) throw Error("v_max must be non-negative");
}

double effective_v_max(const PsoConfig& cfg, const RoomModel& room)
{
    if (cfg.v_max > 0.0) {
        return cfg.v_max;
    }
    if (cfg.iterations == 0) {
        return std::numeric_limits<double>::infinity();
    }
    const double diagonal = (room.boundary.bbox_max() - room.boundary.bbox_min()).norm();
    return 2.0 * diagonal / static_cast<double>(cfg.iterations);
}

// -- archive ---------------------------------------------------------------

std::vector<double> crowding_distances(const std::vector<Objectives>& points)
{
    const std::size_t n = points.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> d(n, 0.0);
    if (n <= 2) {
        std::fill(d.begin(), d.end(), inf);
        return d;
    }
    std::vector<std::size_t> order(n);
    for (const auto objective : {&Objectives::f1, &Objectives::f2}) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return points[a].*objective < points[b].*objective;
        });
        d[order.front()] = inf;
        d[order.back()] = inf;
        const double range = points[order.back()].*objective - points[order.front()].*objective;
        if (range <= 0.0) {
            continue;
        }
        for (std::size_t k = 1; k + 1 < n; ++k) {
            d[order[k]] += (points[order[k + 1]].*objective - points[order[k - 1]].*objective) / range;
        }
    }
    return d;
}

ParetoArchive::ParetoArchive(std::size_t capacity) : capacity_(capacity)
{
    if (capacity_ == 0) {
        throw Error("archive capacity must be positive");
    }
}

bool ParetoArchive::insert(const Placement& placement, const Objectives& objectives)
{
    for (const auto& e : entries_) {
        if (dominates(e.objectives, objectives) || e.objectives == objectives) {
            return false;
        }
    }
    std::erase_if(entries_, [&](const ArchiveEntry& e) { return dominates(objectives, e.objectives); });
    entries_.push_back({placement, objectives});
    bool kept = true;
    while (entries_.size() > capacity_) {
        update_crowding();
        // Smallest crowding goes; among equals the newest.
        std::size_t worst = 0;
        for (std::size_t i = 1; i < entries_.size(); ++i) {
            if (entries_[i].crowding <= entries_[worst].crowding) {
                worst = i;
            }
        }
        if (worst + 1 == entries_.size()) {
            kept = false;
        }
        entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    update_crowding();
    return kept;
}

void ParetoArchive::update_crowding()
{
    std::vector<Objectives> pts;
    pts.reserve(entries_.size());
    for (const auto& e : entries_) {
        pts.push_back(e.objectives);
    }
    const auto d = crowding_distances(pts);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        entries_[i].crowding = d[i];
    }
}

const ArchiveEntry& ParetoArchive::best_f1() const
{
    if (entries_.empty()) throw Error("archive is empty");
    return *std::min_element(entries_.begin(), entries_.end(), [](const ArchiveEntry& a, const ArchiveEntry& b) {
        return a.objectives.f1 != b.objectives.f1 ? a.objectives.f1 < b.objectives.f1
                                                  : a.objectives.f2 < b.objectives.f2;
    });
}

const ArchiveEntry& ParetoArchive::best_f2() const
{
    if (entries_.empty()) throw Error("archive is empty");
    return *std::min_element(entries_.begin(), entries_.end(), [](const ArchiveEntry& a, const ArchiveEntry& b) {
        return a.objectives.f2 != b.objectives.f2 ? a.objectives.f2 < b.objectives.f2
                                                  : a.objectives.f1 < b.objectives.f1;
    });
}

const Placement& select_leader(const ParetoArchive& archive, Rng& rng)
{
    if (archive.empty()) {
        throw Error("cannot select a leader from an empty archive");
    }
    std::uniform_int_distribution<std::size_t> pick(0, archive.size() - 1);
    const auto& a = archive.entries()[pick(rng)];
    const auto& b = archive.entries()[pick(rng)];
    if (a.crowding > b.crowding) return a.placement;
    if (b.crowding > a.crowding) return b.placement;
    return std::bernoulli_distribution(0.5)(rng) ? a.placement : b.placement;
}

// -- particle updates --------------------------------------------------------

std::vector<Vec2> apply_velocity_rule(const std::vector<Vec2>& velocity, const std::vector<Vec2>& position,
                                      const std::vector<Vec2>& aligned_pbest,
                                      const std::vector<Vec2>& aligned_leader, const VelocityCoefficients& k,
                                      double v_max)
{
    const std::size_t m = position.size();
    if (velocity.size() != m || aligned_pbest.size() != m || aligned_leader.size() != m) {
        throw Error("velocity and placement dimensions differ");
    }
    std::vector<Vec2> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        Vec2 v = k.inertia * velocity[i] + k.cognitive * (aligned_pbest[i] - position[i]) +
                 k.social * (aligned_leader[i] - position[i]);
        v.x = std::clamp(v.x, -v_max, v_max);
        v.y = std::clamp(v.y, -v_max, v_max);
        out[i] = v;
    }
    return out;
}

std::vector<Vec2> velocity_update(const SwarmParticle& p, const Placement& leader, const PsoConfig& cfg,
                                  double v_max, bool type_constrained, Rng& rng)
{
    const double w = uniform(rng, cfg.w.lo, cfg.w.hi);
    const double c1 = uniform(rng, cfg.c1.lo, cfg.c1.hi);
    const double r1 = uniform(rng, 0.0, 1.0);
    const double c2 = uniform(rng, cfg.c2.lo, cfg.c2.hi);
    const double r2 = uniform(rng, 0.0, 1.0);

    std::vector<Vec2> position(p.placement.size());
    for (std::size_t i = 0; i < position.size(); ++i) {
        position[i] = p.placement[i].position.xy();
    }
    return apply_velocity_rule(p.velocity, position, align_leader(p.placement, p.pbest, type_constrained),
                               align_leader(p.placement, leader, type_constrained), {w, c1 * r1, c2 * r2},
                               v_max);
}

RepairResult position_update(const SwarmParticle& p, const Problem& problem, Rng& rng)
{
    if (p.velocity.size() != p.placement.size()) {
        throw Error("velocity and placement dimensions differ");
    }
    Placement moved = p.placement;
    for (std::size_t i = 0; i < moved.size(); ++i) {
        moved[i].position.x += p.velocity[i].x;
        moved[i].position.y += p.velocity[i].y;
    }
    return repair(std::move(moved), problem.room, problem.grid, problem.objective, problem.repair, rng);
}

SwarmParticle upmutate(SwarmParticle p, const RoomModel& room, int n_types, std::size_t m_max, double v_max,
                       Rng& rng)
{
    if (p.placement.size() >= m_max) {
        return p;
    }
    const Vec2 xy = sample_margin_region(room, rng);
    const LrpType type = type_to_add(p.placement, n_types);
    p.placement.lrps.push_back({{xy.x, xy.y, room.z_l}, type, p.placement.size()});
    const double cap = std::isfinite(v_max) ? v_max : 1.0;
    const double vx = uniform(rng, -cap, cap);
    const double vy = uniform(rng, -cap, cap);
    p.velocity.push_back({vx, vy});
    return p;
}

Vec2 max_visibility_centroid(const Grid& grid, const std::vector<VisibilityMask>& masks)
{
    const auto counts = visible_counts(grid, masks);
    const int top = *std::max_element(counts.begin(), counts.end());
    std::vector<std::uint8_t> seen(grid.size(), 0);
    std::vector<std::size_t> stack;
    std::size_t best_size = 0;
    Vec2 best_centroid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (seen[i] || counts[i] != top) {
            continue;
        }
        Vec2 acc;
        std::size_t n = 0;
        seen[i] = 1;
        stack.push_back(i);
        while (!stack.empty()) {
            const auto cur = stack.back();
            stack.pop_back();
            acc += grid.center(cur).xy();
            ++n;
            for (const auto nb : grid.neighbours4(cur)) {
                if (!seen[nb] && counts[nb] == top) {
                    seen[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }
        if (n > best_size) {
            best_size = n;
            best_centroid = (1.0 / static_cast<double>(n)) * acc;
        }
    }
    return best_centroid;
}

SwarmParticle downmutate(SwarmParticle p, const Problem& problem, Rng& rng)
{
    const auto& obj = problem.objective;
    const std::size_t floor = std::max(obj.limits.k_min, obj.fingerprint_size);
    if (p.placement.size() <= floor) {
        return p;
    }
    const auto masks = compute_masks(p.placement, problem.grid, problem.room);
    const Vec2 centroid = max_visibility_centroid(problem.grid, masks);
    const LrpType type = type_to_remove(p.placement, obj.n_types);

    std::size_t victim = p.placement.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.placement.size(); ++i) {
        if (p.placement[i].type != type) {
            continue;
        }
        const double d = (p.placement[i].position.xy() - centroid).squared_norm();
        if (d < best) {
            best = d;
            victim = i;
        }
    }
    if (victim == p.placement.size()) {
        return p;
    }

    SwarmParticle out = p;
    out.placement.lrps.erase(out.placement.lrps.begin() + static_cast<std::ptrdiff_t>(victim));
    out.velocity.erase(out.velocity.begin() + static_cast<std::ptrdiff_t>(victim));
    out.placement.reindex();
    auto repaired = repair(std::move(out.placement), problem.room, problem.grid, obj, problem.repair, rng);
    if (!repaired.feasible) {
        return p;
    }
    out.placement = std::move(repaired.placement);
    return out;
}

// -- swarm -----------------------------------------------------------------

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn)
{
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    const auto count = std::min<std::size_t>(threads, n);
    workers.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers) {
        w.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

Optimizer::Optimizer(const Problem& problem, PsoConfig cfg)
    : problem_(problem), cfg_(cfg), v_max_(effective_v_max(cfg, problem.room)), archive_(cfg.archive_capacity)
{
    cfg_.validate();
}

void Optimizer::initialize()
{
    const std::size_t n = cfg_.swarm_size;
    std::vector<std::optional<Placement>> found(n);
    parallel_for(n, cfg_.threads, [&](std::size_t j) {
        Rng rng = make_rng(cfg_.seed, {kInitStream, j});
        std::uniform_int_distribution<std::size_t> pick_m(cfg_.m_init_min, cfg_.m_init_max);
        for (std::uint64_t attempt = 0; attempt < 4 && !found[j]; ++attempt) {
            const std::size_t m = pick_m(rng);
            found[j] = random_feasible(problem_.room, problem_.grid, m, problem_.objective, problem_.repair,
                                       rng());
        }
    });
    std::vector<Placement> ok;
    for (const auto& f : found) {
        if (f) ok.push_back(*f);
    }
    if (ok.empty()) {
        throw InitializationError("no feasible initial placement could be generated");
    }
    std::vector<Placement> placements;
    placements.reserve(n);
    std::size_t fill = 0;
    for (const auto& f : found) {
        placements.push_back(f ? *f : ok[fill++ % ok.size()]);
    }
    initialize(std::move(placements));
}

void Optimizer::initialize(std::vector<Placement> placements)
{
    if (placements.empty()) {
        throw InitializationError("swarm needs at least one particle");
    }
    particles_.clear();
    particles_.resize(placements.size());
    archive_ = ParetoArchive(cfg_.archive_capacity);
    history_.clear();
    iteration_ = 0;
    evaluations_ = 0;
    min_feasible_m_ = 0;

    std::vector<Evaluation> evals(placements.size());
    parallel_for(placements.size(), cfg_.threads, [&](std::size_t j) {
        placements[j].reindex();
        evals[j] = evaluate(placements[j], problem_.room, problem_.grid, problem_.objective);
    });
    for (std::size_t j = 0; j < placements.size(); ++j) {
        auto& p = particles_[j];
        p.placement = std::move(placements[j]);
        p.velocity.assign(p.placement.size(), Vec2{});
        p.pbest = p.placement;
        p.pbest_objectives = evals[j].objectives;
        p.pbest_history = {evals[j].objectives};
        absorb(j, evals[j]);
    }
    record_stats();
}

void Optimizer::absorb(std::size_t j, const Evaluation& ev)
{
    auto& p = particles_[j];
    p.objectives = ev.objectives;
    p.feasible = ev.feasible;
    ++evaluations_;
    if (ev.feasible && (min_feasible_m_ == 0 || p.placement.size() < min_feasible_m_)) {
        min_feasible_m_ = p.placement.size();
    }
    archive_.insert(p.placement, ev.objectives);
}

void Optimizer::step()
{
    if (particles_.empty()) {
        throw Error("optimizer is not initialized");
    }
    ++iteration_;
    const bool type_constrained = problem_.objective.n_types == 2;
    const std::size_t n = particles_.size();
    std::vector<SwarmParticle> next(n);
    std::vector<Evaluation> evals(n);
    std::vector<Rng> rngs(n);

    parallel_for(n, cfg_.threads, [&](std::size_t j) {
        Rng rng = make_rng(cfg_.seed, {kStepStream, iteration_, j});
        SwarmParticle p = particles_[j];
        const Placement& leader = select_leader(archive_, rng);
        p.velocity = velocity_update(p, leader, cfg_, v_max_, type_constrained, rng);
        auto moved = position_update(p, problem_, rng);
        p.placement = std::move(moved.placement);
        std::vector<VisibilityMask> masks = std::move(moved.masks);

        const double u = uniform(rng, 0.0, 1.0);
        if (u < cfg_.p_up) {
            const std::size_t before = p.placement.size();
            p = upmutate(std::move(p), problem_.room, problem_.objective.n_types, problem_.objective.limits.m_max,
                         v_max_, rng);
            if (p.placement.size() != before) {
                auto fixed = repair(std::move(p.placement), problem_.room, problem_.grid, problem_.objective,
                                    problem_.repair, rng);
                p.placement = std::move(fixed.placement);
                masks = std::move(fixed.masks);
            }
        } else if (u < cfg_.p_up + cfg_.p_down) {
            const std::size_t before = p.placement.size();
            p = downmutate(std::move(p), problem_, rng);
            if (p.placement.size() != before) {
                masks = compute_masks(p.placement, problem_.grid, problem_.room);
            }
        }
        if (p.velocity.size() != p.placement.size()) {
            throw Error("velocity length diverged from placement size");
        }
        evals[j] = evaluate(p.placement, problem_.room, problem_.grid, masks, problem_.objective);
        next[j] = std::move(p);
        rngs[j] = rng;
    });

    // Serial in particle order so results do not depend on scheduling.
    for (std::size_t j = 0; j < n; ++j) {
        auto& p = particles_[j];
        p = std::move(next[j]);
        const Objectives& cand = evals[j].objectives;
        bool replace = false;
        if (dominates(cand, p.pbest_objectives)) {
            replace = true;
        } else if (!dominates(p.pbest_objectives, cand)) {
            const bool beaten = std::any_of(p.pbest_history.begin(), p.pbest_history.end(),
                                            [&](const Objectives& h) { return dominates(h, cand); });
            replace = !beaten && std::bernoulli_distribution(0.5)(rngs[j]);
        }
        if (replace) {
            p.pbest = p.placement;
            p.pbest_objectives = cand;
            std::erase_if(p.pbest_history, [&](const Objectives& h) { return dominates(cand, h); });
            p.pbest_history.push_back(cand);
        }
        absorb(j, evals[j]);
    }
    record_stats();
}

void Optimizer::record_stats()
{
    IterationStats s;
    s.iteration = iteration_;
    s.archive_size = archive_.size();
    s.best_f1 = archive_.best_f1().objectives.f1;
    s.best_f2 = archive_.best_f2().objectives.f2;
    s.feasible_particles = static_cast<std::size_t>(
        std::count_if(particles_.begin(), particles_.end(), [](const SwarmParticle& p) { return p.feasible; }));
    s.min_feasible_m = min_feasible_m_;
    s.evaluations = evaluations_;
    history_.push_back(s);
}

Optimizer run(const Problem& problem, const PsoConfig& cfg, const IterationCallback& on_iteration)
{
    Optimizer opt(problem, cfg);
    opt.initialize();
    if (on_iteration) on_iteration(opt);
    for (std::size_t i = 0; i < cfg.iterations; ++i) {
        opt.step();
        if (on_iteration) on_iteration(opt);
    }
    return opt;
}

}  // namespace lrpopt
