#include "iap/app.hpp"

#include <algorithm>
#include <cmath>

#include "iap/error.hpp"

namespace iap {

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::Creation: return "creation";
        case EventKind::Enrichment: return "enrichment";
        case EventKind::Merge: return "merge";
        case EventKind::Prune: return "prune";
    }
    return "?";
}

EventKind parse_event_kind(const std::string& s) {
    if (s == "creation") return EventKind::Creation;
    if (s == "enrichment") return EventKind::Enrichment;
    if (s == "merge") return EventKind::Merge;
    if (s == "prune") return EventKind::Prune;
    throw ParseError("unknown event kind '" + s + "'");
}

nlohmann::json to_json(const StratificationEvent& e) {
    nlohmann::json j = {{"time", e.time},
                        {"kind", to_string(e.kind)},
                        {"sources", e.sources},
                        {"target", nullptr},
                        {"new_members", e.new_members},
                        {"member_count", e.member_count}};
    if (e.target) j["target"] = *e.target;
    return j;
}

StratificationEvent event_from_json(const nlohmann::json& j) {
    StratificationEvent e;
    e.time = j.at("time").get<int>();
    e.kind = parse_event_kind(j.at("kind").get<std::string>());
    e.sources = j.at("sources").get<std::vector<ClusterId>>();
    if (!j.at("target").is_null()) e.target = j.at("target").get<ClusterId>();
    e.new_members = j.at("new_members").get<std::size_t>();
    e.member_count = j.at("member_count").get<std::size_t>();
    return e;
}

FeatureVector mean_vector(std::span<const FeatureVector> xs) {
    if (xs.empty()) throw InvalidInput("mean of zero vectors");
    FeatureVector mean(xs.front().size(), 0.0);
    for (const auto& x : xs) {
        if (x.size() != mean.size()) throw InvalidInput("dimension mismatch in mean");
        for (std::size_t j = 0; j < x.size(); ++j) mean[j] += x[j];
    }
    for (double& v : mean) v /= static_cast<double>(xs.size());
    return mean;
}

std::vector<std::pair<ClusterId, FeatureVector>> pack(std::span<const Cluster> clusters,
                                                      const std::map<ObjectId, FeatureVector>& objects) {
    std::vector<std::pair<ClusterId, FeatureVector>> out;
    out.reserve(clusters.size());
    for (const auto& c : clusters) {
        if (c.members.empty()) throw InvalidInput("cluster " + std::to_string(c.id) + " has no members");
        std::vector<FeatureVector> xs;
        xs.reserve(c.members.size());
        for (ObjectId id : c.members) {
            const auto it = objects.find(id);
            if (it == objects.end()) throw InvalidInput("unknown object id " + std::to_string(id));
            xs.push_back(it->second);
        }
        out.emplace_back(c.id, mean_vector(xs));
    }
    return out;
}

std::pair<std::vector<int>, std::vector<int>> split(std::span<const int> combined, std::size_t n_centroids) {
    if (n_centroids > combined.size()) throw InvalidInput("more centroids than labels");
    const auto mid = combined.begin() + static_cast<std::ptrdiff_t>(n_centroids);
    return {std::vector<int>(combined.begin(), mid), std::vector<int>(mid, combined.end())};
}

std::map<ObjectId, int> unpack_and_update(std::span<const int> centroid_labels, std::span<const Cluster> clusters) {
    if (centroid_labels.size() != clusters.size()) throw InvalidInput("one temporary label per centroid expected");
    std::map<ObjectId, int> out;
    for (std::size_t c = 0; c < clusters.size(); ++c)
        for (ObjectId id : clusters[c].members) out[id] = centroid_labels[c];
    return out;
}

namespace {

struct LabelledEvent {
    int label;
    StratificationEvent event;
};

std::vector<LabelledEvent> classify_labelled(std::span<const ClusterId> prior_ids, std::span<const int> combined_labels,
                                             int time, ClusterId& next_id) {
    const auto [centroid_labels, new_labels] = split(combined_labels, prior_ids.size());
    std::map<int, std::pair<std::vector<ClusterId>, std::size_t>> groups;  // label -> (centroids, #new)
    for (std::size_t c = 0; c < centroid_labels.size(); ++c) groups[centroid_labels[c]].first.push_back(prior_ids[c]);
    for (int l : new_labels) ++groups[l].second;

    std::vector<LabelledEvent> out;
    for (const auto& [label, g] : groups) {
        const auto& [sources, fresh] = g;
        StratificationEvent e;
        e.time = time;
        e.new_members = fresh;
        e.sources = sources;
        if (sources.empty()) {
            e.kind = EventKind::Creation;
            e.target = next_id++;
        } else if (sources.size() == 1) {
            if (fresh == 0) continue;  // unchanged cluster
            e.kind = EventKind::Enrichment;
            e.target = sources.front();
        } else {
            e.kind = EventKind::Merge;
            std::sort(e.sources.begin(), e.sources.end());
            e.target = next_id++;
        }
        out.push_back({label, std::move(e)});
    }
    return out;
}

}  // namespace

std::vector<StratificationEvent> classify_stratification(std::span<const ClusterId> prior_ids,
                                                         std::span<const int> combined_labels, int time,
                                                         ClusterId& next_id) {
    std::vector<StratificationEvent> events;
    for (auto& le : classify_labelled(prior_ids, combined_labels, time, next_id)) events.push_back(std::move(le.event));
    return events;
}

AppSession::AppSession(APConfig config, double th_gamma, SimilarityMetric metric)
    : config_(std::move(config)), th_gamma_(th_gamma), metric_(std::move(metric)) {
    config_.validate();
    if (!(th_gamma_ >= 1.0)) throw InvalidInput("th_gamma must lie in [1, +inf]");
}

const Cluster* AppSession::find(ClusterId id) const {
    const auto it = std::lower_bound(clusters_.begin(), clusters_.end(), id,
                                     [](const Cluster& c, ClusterId v) { return c.id < v; });
    return it != clusters_.end() && it->id == id ? &*it : nullptr;
}

void AppSession::recompute_centroid(Cluster& c) const {
    c.centroid = pack(std::span<const Cluster>(&c, 1), objects_).front().second;
}

AppSession::StepOutcome AppSession::step(std::span<const ObjectId> ids, std::span<const FeatureVector> vectors,
                                         const FeatureScaler* scaler) {
    if (ids.size() != vectors.size()) throw InvalidInput("ids and vectors differ in length");
    if (vectors.empty()) throw InvalidInput("APP step needs at least one new object");
    check_feature_vectors(vectors);
    if (!objects_.empty() && vectors.front().size() != objects_.begin()->second.size())
        throw InvalidInput("batch dimension differs from stored objects");
    for (std::size_t j = 0; j < ids.size(); ++j) {
        if (objects_.count(ids[j])) throw InvalidInput("object id " + std::to_string(ids[j]) + " already present");
        for (std::size_t k = 0; k < j; ++k)
            if (ids[k] == ids[j]) throw InvalidInput("object id " + std::to_string(ids[j]) + " repeated in batch");
    }

    StepOutcome out;
    out.time = t_;
    const std::size_t n_centroids = clusters_.size();

    std::vector<FeatureVector> input;
    input.reserve(n_centroids + vectors.size());
    for (const auto& c : clusters_) input.push_back(scaler ? scaler->apply(c.centroid) : c.centroid);
    for (const auto& x : vectors) input.push_back(scaler ? scaler->apply(x) : x);

    const auto s = build_similarity_matrix(input, config_.preference, metric_);
    out.ap_input_size = s.size();
    out.ap_result = run_ap(s, config_);

    for (std::size_t j = 0; j < ids.size(); ++j) objects_.emplace(ids[j], vectors[j]);

    std::vector<ClusterId> prior_ids;
    for (const auto& c : clusters_) prior_ids.push_back(c.id);
    auto labelled = classify_labelled(prior_ids, out.ap_result.labels, t_, next_id_);

    const auto new_labels = split(out.ap_result.labels, n_centroids).second;
    std::map<int, std::vector<ObjectId>> arrivals;  // temporary label -> new object ids
    for (std::size_t j = 0; j < new_labels.size(); ++j) arrivals[new_labels[j]].push_back(ids[j]);

    static const std::vector<ObjectId> none;
    std::vector<StratificationEvent> events;
    for (auto& [label, e] : labelled) {
        const auto fresh_it = arrivals.find(label);
        const auto& fresh = fresh_it == arrivals.end() ? none : fresh_it->second;
        auto live = [this](ClusterId id) {
            return std::find_if(clusters_.begin(), clusters_.end(), [id](const Cluster& k) { return k.id == id; });
        };

        if (e.kind == EventKind::Enrichment) {
            auto& c = *live(e.sources.front());
            c.members.insert(c.members.end(), fresh.begin(), fresh.end());
            c.gamma = t_;
            recompute_centroid(c);
            e.member_count = c.members.size();
        } else {
            Cluster born;
            born.id = *e.target;
            born.gamma = t_;
            born.created_at = t_;
            for (ClusterId src : e.sources) {
                const auto it = live(src);
                born.members.insert(born.members.end(), it->members.begin(), it->members.end());
                clusters_.erase(it);
            }
            born.members.insert(born.members.end(), fresh.begin(), fresh.end());
            recompute_centroid(born);
            e.member_count = born.members.size();
            clusters_.push_back(std::move(born));  // minted ids exceed every live id
        }
        events.push_back(std::move(e));
    }

    history_.insert(history_.end(), events.begin(), events.end());
    out.events = std::move(events);
    auto pruned = prune(t_);
    out.events.insert(out.events.end(), pruned.begin(), pruned.end());
    ++t_;
    return out;
}

std::vector<StratificationEvent> AppSession::prune(int now) {
    std::vector<StratificationEvent> events;
    std::vector<Cluster> kept;
    kept.reserve(clusters_.size());
    for (auto& c : clusters_) {
        if (static_cast<double>(now - c.gamma) > th_gamma_) {
            StratificationEvent e;
            e.time = now;
            e.kind = EventKind::Prune;
            e.sources = {c.id};
            e.member_count = c.members.size();
            events.push_back(std::move(e));
            for (ObjectId id : c.members) objects_.erase(id);
        } else {
            kept.push_back(std::move(c));
        }
    }
    clusters_ = std::move(kept);
    history_.insert(history_.end(), events.begin(), events.end());
    return events;
}

std::vector<std::pair<ObjectId, ClusterId>> AppSession::assignment() const {
    std::vector<std::pair<ObjectId, ClusterId>> out;
    out.reserve(objects_.size());
    for (const auto& c : clusters_)
        for (ObjectId id : c.members) out.emplace_back(id, c.id);
    std::sort(out.begin(), out.end());
    return out;
}

nlohmann::json AppSession::snapshot() const {
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& c : clusters_)
        clusters.push_back({{"id", c.id},
                            {"gamma", c.gamma},
                            {"created_at", c.created_at},
                            {"members", c.members},
                            {"centroid", c.centroid}});
    nlohmann::json objects = nlohmann::json::array();
    for (const auto& [id, x] : objects_) objects.push_back({{"id", id}, {"x", x}});
    nlohmann::json history = nlohmann::json::array();
    for (const auto& e : history_) history.push_back(to_json(e));
    return {{"format", "iap-app-state"},
            {"version", 1},
            {"t", t_},
            {"next_cluster_id", next_id_},
            {"th_gamma", std::isinf(th_gamma_) ? nlohmann::json(nullptr) : nlohmann::json(th_gamma_)},
            {"clusters", clusters},
            {"objects", objects},
            {"history", history}};
}

AppSession AppSession::restore(const nlohmann::json& j, APConfig config, SimilarityMetric metric) {
    try {
        if (j.at("format") != "iap-app-state" || j.at("version") != 1) throw ParseError("not an APP state snapshot");
        const auto& th = j.at("th_gamma");
        AppSession s(std::move(config), th.is_null() ? kNoPruning : th.get<double>(), std::move(metric));
        s.t_ = j.at("t").get<int>();
        s.next_id_ = j.at("next_cluster_id").get<ClusterId>();
        for (const auto& o : j.at("objects")) s.objects_.emplace(o.at("id").get<ObjectId>(), o.at("x").get<FeatureVector>());
        for (const auto& c : j.at("clusters")) {
            Cluster k;
            k.id = c.at("id").get<ClusterId>();
            k.gamma = c.at("gamma").get<int>();
            k.created_at = c.at("created_at").get<int>();
            k.members = c.at("members").get<std::vector<ObjectId>>();
            k.centroid = c.at("centroid").get<FeatureVector>();
            s.clusters_.push_back(std::move(k));
        }
        std::sort(s.clusters_.begin(), s.clusters_.end(), [](const Cluster& a, const Cluster& b) { return a.id < b.id; });
        if (j.contains("history"))
            for (const auto& e : j.at("history")) s.history_.push_back(event_from_json(e));
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("APP snapshot: ") + e.what());
    }
}

}  // namespace iap
