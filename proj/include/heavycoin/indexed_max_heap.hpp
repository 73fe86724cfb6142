#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace heavycoin {

// Addressable binary max-heap over dense ids 0..n-1 with double keys.
// Supports O(log n) push and key update; ties are broken toward the lowest
// id so that selection is deterministic.
class IndexedMaxHeap {
public:
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

    std::size_t top() const {
        if (heap_.empty()) throw std::logic_error("top() on empty heap");
        return heap_.front().id;
    }

    double top_key() const {
        if (heap_.empty()) throw std::logic_error("top_key() on empty heap");
        return heap_.front().key;
    }

    void push(std::size_t id, double key) {
        if (id >= pos_.size()) pos_.resize(id + 1, kNone);
        if (pos_[id] != kNone) throw std::logic_error("push() of id already in heap");
        heap_.push_back(Entry{key, id});
        pos_[id] = heap_.size() - 1;
        sift_up(heap_.size() - 1);
    }

    void update(std::size_t id, double key) {
        if (id >= pos_.size() || pos_[id] == kNone) {
            throw std::logic_error("update() of id not in heap");
        }
        const std::size_t i = pos_[id];
        heap_[i].key = key;
        sift_up(i);
        sift_down(pos_[id]);
    }

    double key_of(std::size_t id) const {
        if (id >= pos_.size() || pos_[id] == kNone) {
            throw std::logic_error("key_of() of id not in heap");
        }
        return heap_[pos_[id]].key;
    }

    // Linear-scan maximum, used to audit the heap against its own invariant.
    double max_key_by_scan() const {
        double best = -std::numeric_limits<double>::infinity();
        for (const Entry& e : heap_) {
            if (e.key > best) best = e.key;
        }
        return best;
    }

    // Verifies heap order and the id -> slot map. O(n).
    bool audit() const {
        for (std::size_t i = 1; i < heap_.size(); ++i) {
            if (before(heap_[i], heap_[(i - 1) / 2])) return false;
        }
        for (std::size_t i = 0; i < heap_.size(); ++i) {
            if (pos_[heap_[i].id] != i) return false;
        }
        return true;
    }

private:
    struct Entry {
        double key;
        std::size_t id;
    };

    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    static bool before(const Entry& a, const Entry& b) {
        return a.key > b.key || (a.key == b.key && a.id < b.id);
    }

    void place(std::size_t slot, const Entry& e) {
        heap_[slot] = e;
        pos_[e.id] = slot;
    }

    void sift_up(std::size_t i) {
        Entry e = heap_[i];
        while (i > 0) {
            const std::size_t parent = (i - 1) / 2;
            if (!before(e, heap_[parent])) break;
            place(i, heap_[parent]);
            i = parent;
        }
        place(i, e);
    }

    void sift_down(std::size_t i) {
        Entry e = heap_[i];
        const std::size_t n = heap_.size();
        for (;;) {
            std::size_t child = 2 * i + 1;
            if (child >= n) break;
            if (child + 1 < n && before(heap_[child + 1], heap_[child])) ++child;
            if (!before(heap_[child], e)) break;
            place(i, heap_[child]);
            i = child;
        }
        place(i, e);
    }

    std::vector<Entry> heap_;
    std::vector<std::size_t> pos_;
};

}  // namespace heavycoin
