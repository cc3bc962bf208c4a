#pragma once

#include <cstdlib>
#include <new>
#include <string>
#include <vector>

namespace tamp {

// 64-byte-aligned storage keeps every SIMD kernel on the same code path no
// matter where the allocator places a buffer, so results are bitwise
// reproducible run to run.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t alignment = 64;

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) {}

    T* allocate(std::size_t n) {
        void* p = std::aligned_alloc(alignment, ((n * sizeof(T) + alignment - 1) / alignment) *
                                                    alignment);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) { std::free(p); }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const {
        return true;
    }
};

using FloatVector = std::vector<float, AlignedAllocator<float>>;

// Dense row-major float tensor. Rank is small (<= 4); images are (C,H,W)
// channels-first, masks are (1,H,W), scalars are {1}.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape_in, float fill = 0.0f);

    static Tensor full(std::vector<int> shape_in, float v);
    static Tensor zeros_like(const Tensor& o);
    static Tensor scalar(float v);

    int numel() const;
    int rank() const { return static_cast<int>(shape.size()); }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    std::string shape_str() const;

    // rank-3 (C,H,W) helpers
    int channels() const { return shape.at(0); }
    int height() const { return shape.at(1); }
    int width() const { return shape.at(2); }
    float& at(int c, int y, int x) { return data[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x]; }
    float at(int c, int y, int x) const { return data[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x]; }

    bool all_finite() const;
    float min_value() const;
    float max_value() const;
    double sum() const;          // accumulated in double
    double mean_abs() const;

    std::vector<int> shape;
    FloatVector data;
};

// throws std::invalid_argument on mismatch; op names the failing operation
void check_same_shape(const Tensor& a, const Tensor& b, const char* op);
void check_rank3(const Tensor& t, const char* op);

}  // namespace tamp
