#pragma once

#include "pinauthor/core/types.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace pinauthor {

// Authoring timeline. Cards are append-only; rollback moves the active
// pointer and rebuilds both memories by replaying the parent chain, so a
// later prompt branches off the rolled-back card.
class Session {
public:
    const std::vector<HistoryCard>& cards() const { return cards_; }
    const std::optional<CardId>& activeCardId() const { return activeCardId_; }
    const HistoryCard* activeCard() const;
    const HistoryCard* findCard(const CardId& id) const;

    // Single slot per generator: the most recent script source.
    const std::optional<std::string>& generatorMemory(ScriptCategory category) const;
    void setGeneratorMemory(ScriptCategory category, std::string source);

    // Oldest first.
    const std::vector<HelperTurn>& helperMemory() const { return helperMemory_; }

    // Assigns the id and parent (the active card), makes it active and
    // folds it into both memories.
    const HistoryCard& appendCard(HistoryCard card);

    // Cards from the root down to `id`. Throws NotFoundError.
    std::vector<const HistoryCard*> chainTo(const CardId& id) const;

    // Flip one artifact's enabled flag on the active card.
    void setArtifactEnabled(std::size_t index, bool enabled);

    friend bool operator==(const Session&, const Session&) = default;

private:
    friend Session rollback(const Session& session, const CardId& cardId);

    void rebuildMemories();

    std::vector<HistoryCard> cards_;
    std::optional<CardId> activeCardId_;
    std::array<std::optional<std::string>, 3> generatorMemory_;
    std::vector<HelperTurn> helperMemory_;
};

// Throws NotFoundError for an unknown card id.
Session rollback(const Session& session, const CardId& cardId);

} // namespace pinauthor
