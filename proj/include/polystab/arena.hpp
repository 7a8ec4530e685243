#pragma once

// Chunked scratch arena for the tower-arithmetic recursion. Allocation hands
// out spans that stay valid until the enclosing Frame unwinds; chunks are
// never reallocated, so growing the arena does not invalidate live spans.

#include "polystab/common.hpp"

#include <cstddef>
#include <memory>
#include <vector>

namespace polystab::detail {

class Workspace {
    struct Chunk {
        explicit Chunk(std::size_t n) : data(n), used(0) {}
        std::vector<u32> data;
        std::size_t used;
    };

public:
    static constexpr std::size_t kMinChunk = 1 << 14;

    u32* alloc(std::size_t n) {
        for (std::size_t i = active_; i < chunks_.size(); ++i) {
            Chunk& ch = *chunks_[i];
            if (ch.data.size() - ch.used >= n) {
                u32* out = ch.data.data() + ch.used;
                ch.used += n;
                active_ = i;
                return out;
            }
        }
        chunks_.push_back(std::make_unique<Chunk>(std::max(n, kMinChunk)));
        active_ = chunks_.size() - 1;
        Chunk& ch = *chunks_.back();
        ch.used = n;
        return ch.data.data();
    }

    u32* alloc0(std::size_t n) {
        u32* out = alloc(n);
        std::fill(out, out + n, 0u);
        return out;
    }

    // RAII rewind point: releases everything allocated after construction.
    class Frame {
    public:
        explicit Frame(Workspace& ws) : ws_(ws), active_(ws.active_) {
            marks_.reserve(ws.chunks_.size());
            for (auto& ch : ws.chunks_) marks_.push_back(ch->used);
        }
        ~Frame() {
            for (std::size_t i = 0; i < marks_.size(); ++i) ws_.chunks_[i]->used = marks_[i];
            for (std::size_t i = marks_.size(); i < ws_.chunks_.size(); ++i) ws_.chunks_[i]->used = 0;
            ws_.active_ = active_ < ws_.chunks_.size() ? active_ : 0;
        }
        Frame(const Frame&) = delete;
        Frame& operator=(const Frame&) = delete;

    private:
        Workspace& ws_;
        std::size_t active_;
        std::vector<std::size_t> marks_;
    };

private:
    std::vector<std::unique_ptr<Chunk>> chunks_;
    std::size_t active_ = 0;
};

inline Workspace& workspace() {
    thread_local Workspace ws;
    return ws;
}

}  // namespace polystab::detail
