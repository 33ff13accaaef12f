#include "pinauthor/core/session.hpp"

#include "pinauthor/core/errors.hpp"

#include <algorithm>

namespace pinauthor {

namespace {
std::size_t slot(ScriptCategory category) { return static_cast<std::size_t>(category); }
} // namespace

const HistoryCard* Session::findCard(const CardId& id) const {
    auto it = std::find_if(cards_.begin(), cards_.end(),
                           [&](const HistoryCard& card) { return card.id == id; });
    return it == cards_.end() ? nullptr : &*it;
}

const HistoryCard* Session::activeCard() const {
    return activeCardId_ ? findCard(*activeCardId_) : nullptr;
}

const std::optional<std::string>& Session::generatorMemory(ScriptCategory category) const {
    return generatorMemory_[slot(category)];
}

void Session::setGeneratorMemory(ScriptCategory category, std::string source) {
    generatorMemory_[slot(category)] = std::move(source);
}

const HistoryCard& Session::appendCard(HistoryCard card) {
    card.id = "card-" + std::to_string(cards_.size() + 1);
    card.parentId = activeCardId_;
    card.enabled.resize(card.artifacts.size(), true);
    cards_.push_back(std::move(card));
    activeCardId_ = cards_.back().id;
    rebuildMemories();
    return cards_.back();
}

std::vector<const HistoryCard*> Session::chainTo(const CardId& id) const {
    std::vector<const HistoryCard*> chain;
    const HistoryCard* card = findCard(id);
    if (!card) throw NotFoundError("no history card with id '" + id + "'");
    while (card) {
        chain.push_back(card);
        card = card->parentId ? findCard(*card->parentId) : nullptr;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

void Session::setArtifactEnabled(std::size_t index, bool enabled) {
    if (!activeCardId_) throw InvalidStateError("session has no active card");
    auto it = std::find_if(cards_.begin(), cards_.end(),
                           [&](const HistoryCard& card) { return card.id == *activeCardId_; });
    if (index >= it->enabled.size()) {
        throw NotFoundError("active card has no artifact " + std::to_string(index));
    }
    it->enabled[index] = enabled;
}

void Session::rebuildMemories() {
    generatorMemory_ = {};
    helperMemory_.clear();
    if (!activeCardId_) return;
    for (const HistoryCard* card : chainTo(*activeCardId_)) {
        helperMemory_.push_back({card->userInput, card->instructions});
        for (const auto& artifact : card->artifacts) {
            generatorMemory_[slot(artifact.category)] = artifact.source;
        }
    }
}

Session rollback(const Session& session, const CardId& cardId) {
    if (!session.findCard(cardId)) throw NotFoundError("no history card with id '" + cardId + "'");
    Session next = session;
    next.activeCardId_ = cardId;
    next.rebuildMemories();
    return next;
}

} // namespace pinauthor
