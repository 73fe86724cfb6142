#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "heavycoin/indexed_max_heap.hpp"

using namespace heavycoin;

namespace {

// Reference selection: max key, lowest id on ties.
std::size_t argmax(const std::vector<double>& keys) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < keys.size(); ++i) {
        if (keys[i] > keys[best]) best = i;
    }
    return best;
}

}  // namespace

TEST_CASE("heap top matches a linear scan under random pushes and updates") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> key(-5.0, 5.0);
    for (int round = 0; round < 20; ++round) {
        IndexedMaxHeap heap;
        std::vector<double> keys;
        for (int op = 0; op < 2000; ++op) {
            if (keys.empty() || gen() % 4 == 0) {
                keys.push_back(key(gen));
                heap.push(keys.size() - 1, keys.back());
            } else {
                const std::size_t id = gen() % keys.size();
                keys[id] = key(gen);
                heap.update(id, keys[id]);
            }
            REQUIRE(heap.audit());
            const std::size_t best = argmax(keys);
            REQUIRE(heap.top() == best);
            REQUIRE(heap.top_key() == keys[best]);
            REQUIRE(heap.max_key_by_scan() == keys[best]);
        }
    }
}

TEST_CASE("ties break toward the lowest id") {
    IndexedMaxHeap heap;
    heap.push(0, 1.0);
    heap.push(1, 2.0);
    heap.push(2, 2.0);
    REQUIRE(heap.top() == 1);
    heap.update(1, 0.5);
    REQUIRE(heap.top() == 2);
    heap.update(0, 2.0);
    REQUIRE(heap.top() == 0);
}

TEST_CASE("misuse is rejected") {
    IndexedMaxHeap heap;
    REQUIRE(heap.empty());
    REQUIRE_THROWS_AS(heap.top(), std::logic_error);
    REQUIRE_THROWS_AS(heap.update(0, 1.0), std::logic_error);
    heap.push(0, 1.0);
    REQUIRE_THROWS_AS(heap.push(0, 2.0), std::logic_error);
    REQUIRE(heap.key_of(0) == 1.0);
}
