#include "ctm/behaviors.hpp"

#include <cmath>

namespace ctm {

namespace {

Tick tick_param(const nlohmann::json& j, const char* name, Tick fallback) {
    if (!j.contains(name)) return fallback;
    const auto v = j.at(name).get<std::int64_t>();
    if (v < 0) throw ConfigError(std::string(name) + " must be nonnegative");
    return static_cast<Tick>(v);
}

double positive_param(const nlohmann::json& j, const char* name, double fallback) {
    const double v = j.value(name, fallback);
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be a finite nonnegative number");
    return v;
}

} // namespace

ConstEmitter::ConstEmitter(Params p) : params_(std::move(p)) {
    if (params_.payload.empty()) throw ConfigError("ConstEmitter needs a non-empty gist");
    gist_ = Gist::make(params_.payload, params_.modality, params_.label);
}

std::unique_ptr<Behavior> ConstEmitter::from_json(const nlohmann::json& j) {
    Params p;
    p.payload = j.value("gist", std::string{});
    p.label = j.value("label", std::string{});
    p.modality = modality_from_string(j.value("modality", std::string("speech")));
    p.weight = j.value("weight", 1.0);
    p.unclear_sign = j.value("sign", std::string{}) == "unclear";
    p.prefer_links = j.value("prefer_links", false);
    p.from = tick_param(j, "from", 0);
    if (j.contains("until")) p.until = tick_param(j, "until", 0);
    return std::make_unique<ConstEmitter>(std::move(p));
}

std::optional<Proposal> ConstEmitter::propose(const ProposalContext& ctx) {
    if (ctx.t < params_.from || (params_.until && ctx.t >= *params_.until)) return std::nullopt;
    Proposal p;
    p.gist = gist_;
    p.magnitude = std::fabs(params_.weight);
    p.sign = params_.unclear_sign ? WeightSign::unclear
             : params_.weight < 0 ? WeightSign::negative
                                  : WeightSign::positive;
    p.route = params_.prefer_links ? Route::links : Route::competition;
    return p;
}

std::unique_ptr<Behavior> InputRelay::from_json(const nlohmann::json& j) {
    return std::make_unique<InputRelay>(positive_param(j, "gain", 1.0));
}

void InputRelay::observe_input(const Chunk& chunk, Tick) {
    if (!pending_ || chunk.intensity > pending_->intensity) pending_ = chunk;
}

std::optional<Proposal> InputRelay::propose(const ProposalContext&) {
    if (!pending_) return std::nullopt;
    Proposal p;
    p.gist = pending_->gist;
    p.magnitude = std::fabs(pending_->weight) * gain_;
    p.sign = pending_->weight < 0 ? WeightSign::negative : WeightSign::positive;
    pending_.reset();
    return p;
}

std::string spelling_skeleton(const std::string& word) {
    std::string out;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (i + 1 < word.size() && ((word[i] == 'i' && word[i + 1] == 'e') || (word[i] == 'e' && word[i + 1] == 'i'))) {
            out.push_back('*');
            ++i;
        } else {
            out.push_back(word[i]);
        }
    }
    return out;
}

std::string apply_ie_rule(const std::string& word) {
    const std::string skeleton = spelling_skeleton(word);
    std::string out;
    for (std::size_t i = 0; i < skeleton.size(); ++i) {
        if (skeleton[i] != '*') {
            out.push_back(skeleton[i]);
        } else {
            out += (i > 0 && skeleton[i - 1] == 'c') ? "ei" : "ie";
        }
    }
    return out;
}

std::unique_ptr<Behavior> SpellingRule::from_json(const nlohmann::json& j) {
    return std::make_unique<SpellingRule>(positive_param(j, "magnitude", 1.0));
}

void SpellingRule::observe_broadcast(const Chunk& broadcast, Tick) {
    if (broadcast.gist.label() == kQueryLabel) pending_ = apply_ie_rule(broadcast.gist.payload());
}

std::optional<Proposal> SpellingRule::propose(const ProposalContext&) {
    if (!pending_) return std::nullopt;
    Proposal p{Gist::make(*pending_, Modality::speech), magnitude_, WeightSign::positive, Route::competition};
    pending_.reset();
    return p;
}

WordMemory::WordMemory(const std::vector<std::string>& words, double magnitude) : magnitude_(magnitude) {
    for (const auto& w : words) spellings_[spelling_skeleton(w)] = w;
}

std::unique_ptr<Behavior> WordMemory::from_json(const nlohmann::json& j) {
    std::vector<std::string> words;
    if (j.contains("word")) words.push_back(j.at("word").get<std::string>());
    if (j.contains("words")) {
        for (const auto& w : j.at("words")) words.push_back(w.get<std::string>());
    }
    if (words.empty()) throw ConfigError("WordMemory needs 'word' or 'words'");
    return std::make_unique<WordMemory>(words, positive_param(j, "magnitude", 1.0));
}

void WordMemory::observe_broadcast(const Chunk& broadcast, Tick) {
    if (broadcast.gist.label() != kQueryLabel) return;
    if (auto s = spelling_of(spelling_skeleton(broadcast.gist.payload()))) pending_ = *s;
}

std::optional<Proposal> WordMemory::propose(const ProposalContext&) {
    if (!pending_) return std::nullopt;
    Proposal p{Gist::make(*pending_, Modality::speech), magnitude_, WeightSign::positive, Route::competition};
    pending_.reset();
    return p;
}

void WordMemory::apply_correction(const Gist& correction) {
    if (correction.is_nil()) return;
    spellings_[spelling_skeleton(correction.payload())] = correction.payload();
}

std::optional<std::string> WordMemory::spelling_of(const std::string& skeleton) const {
    const auto it = spellings_.find(skeleton);
    if (it == spellings_.end()) return std::nullopt;
    return it->second;
}

FuelGauge::FuelGauge(double capacity, double burn_rate, std::string feed_label)
    : capacity_(capacity), burn_rate_(burn_rate), feed_label_(std::move(feed_label)) {}

std::unique_ptr<Behavior> FuelGauge::from_json(const nlohmann::json& j) {
    return std::make_unique<FuelGauge>(positive_param(j, "capacity", 10.0), positive_param(j, "burn_rate", 1.0),
                                       j.value("feed_label", std::string("food")));
}

void FuelGauge::observe_input(const Chunk& chunk, Tick t) {
    if (chunk.gist.label() == feed_label_) last_fed_ = t;
}

double FuelGauge::deficit(Tick t) const {
    const double burned = burn_rate_ * static_cast<double>(t - std::min(t, last_fed_));
    return std::min(capacity_, burned);
}

std::optional<Proposal> FuelGauge::propose(const ProposalContext& ctx) {
    const double d = deficit(ctx.t);
    if (d <= 0.0) return std::nullopt;
    return Proposal{Gist::make("hunger", Modality::sensation), d, WeightSign::negative, Route::competition};
}

PainSource::PainSource(Tick start, Tick duration, double magnitude, std::string label)
    : start_(start), duration_(duration), magnitude_(magnitude), label_(std::move(label)),
      gist_(Gist::make(label_, Modality::feeling)) {}

std::unique_ptr<Behavior> PainSource::from_json(const nlohmann::json& j) {
    return std::make_unique<PainSource>(tick_param(j, "start", 0), tick_param(j, "duration", 1),
                                        positive_param(j, "magnitude", 1000.0), j.value("label", std::string("pain")));
}

std::optional<Proposal> PainSource::propose(const ProposalContext& ctx) {
    if (ctx.t < start_ || ctx.t >= start_ + duration_) return std::nullopt;
    return Proposal{gist_, magnitude_, WeightSign::negative, Route::competition};
}

bool PainSource::relevant(const Chunk& interrupt) const {
    return interrupt.gist.label() == label_;
}

std::unique_ptr<Behavior> EchoProbe::from_json(const nlohmann::json& j) {
    auto pattern = j.value("pattern", std::string{});
    if (pattern.empty()) throw ConfigError("EchoProbe needs a non-empty pattern");
    return std::make_unique<EchoProbe>(std::move(pattern));
}

bool EchoProbe::acknowledges(const Chunk& broadcast) const {
    return !broadcast.gist.is_nil() && broadcast.gist.label().find(pattern_) != std::string::npos;
}

BehaviorRegistry BehaviorRegistry::with_builtins() {
    BehaviorRegistry r;
    r.add("Idle", [](const nlohmann::json&) { return std::make_unique<Idle>(); });
    r.add("ConstEmitter", &ConstEmitter::from_json);
    r.add("InputRelay", &InputRelay::from_json);
    r.add("SpellingRule", &SpellingRule::from_json);
    r.add("WordMemory", &WordMemory::from_json);
    r.add("FuelGauge", &FuelGauge::from_json);
    r.add("PainSource", &PainSource::from_json);
    r.add("EchoProbe", &EchoProbe::from_json);
    return r;
}

} // namespace ctm
