#include "forge/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <omp.h>

#include "forge/error.hpp"
#include "forge/rng.hpp"

namespace forge {

void RenderSettings::validate() const {
    if (resolution.width <= 0 || resolution.height <= 0) throw Error("render settings: resolution must be positive");
    if (samples_per_pixel < 1) throw Error("render settings: samples_per_pixel must be >= 1");
    if (!(gamma > 0)) throw Error("render settings: gamma must be positive");
    if (threads < 0) throw Error("render settings: threads must be >= 0");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRayEps = 1e-9;     // minimum hit distance
constexpr double kShadowLift = 1e-6; // shadow ray origin offset along the normal
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

struct Ray {
    Vec3 o, d;
};

struct WorldTri {
    Vec3 v0, e1, e2;
    Vec3 normal;  // geometric, from the winding
    std::array<std::uint32_t, 3> vi;
    std::uint32_t object;
};

struct ObjectInfo {
    Quat inverse_rotation;
    Quat rotation;
    Vec3 translation;
    double inverse_scale;
    const TriMesh* mesh;
    const Material* material;
    std::uint16_t id;
};

struct Geometry {
    std::vector<WorldTri> tris;
    std::vector<ObjectInfo> objects;
};

Geometry build_geometry(const SceneSpec& scene) {
    Geometry g;
    for (std::size_t k = 0; k < scene.objects.size(); ++k) {
        const PlacedObject& obj = scene.objects[k];
        const TriMesh& mesh = obj.asset->canonical_mesh;
        g.objects.push_back({obj.pose.rotation.conjugate(), obj.pose.rotation, obj.pose.translation,
                             1.0 / obj.uniform_scale, &mesh, &obj.asset->material, obj.instance_id});
        std::vector<Vec3> world;
        world.reserve(mesh.vertices.size());
        for (const auto& v : mesh.vertices) world.push_back(obj.to_world(v));
        for (const auto& t : mesh.triangles) {
            WorldTri w;
            w.v0 = world[t[0]];
            w.e1 = world[t[1]] - w.v0;
            w.e2 = world[t[2]] - w.v0;
            w.normal = normalize(cross(w.e1, w.e2));
            w.vi = {t[0], t[1], t[2]};
            w.object = static_cast<std::uint32_t>(k);
            g.tris.push_back(w);
        }
    }
    return g;
}

// Moller-Trumbore. Shared by both intersectors so they agree bit for bit.
inline bool intersect(const WorldTri& tri, const Ray& r, double& t, double& u, double& v) noexcept {
    const Vec3 p = cross(r.d, tri.e2);
    const double det = dot(tri.e1, p);
    if (det == 0.0) return false;
    const double inv = 1.0 / det;
    const Vec3 s = r.o - tri.v0;
    u = dot(s, p) * inv;
    if (u < 0.0 || u > 1.0) return false;
    const Vec3 q = cross(s, tri.e1);
    v = dot(r.d, q) * inv;
    if (v < 0.0 || u + v > 1.0) return false;
    t = dot(tri.e2, q) * inv;
    return t > kRayEps;
}

struct Hit {
    double t = kInf;
    double u = 0, v = 0;
    std::uint32_t tri = kNone;

    // Ties on distance go to the lower triangle index so any traversal
    // order yields the same hit.
    void offer(double t_new, double u_new, double v_new, std::uint32_t index) noexcept {
        if (t_new < t || (t_new == t && index < tri)) {
            t = t_new;
            u = u_new;
            v = v_new;
            tri = index;
        }
    }
};

class BruteForce {
public:
    explicit BruteForce(const Geometry& g) : g_(g) {}

    Hit closest(const Ray& r) const noexcept {
        Hit h;
        double t, u, v;
        for (std::uint32_t i = 0; i < g_.tris.size(); ++i)
            if (intersect(g_.tris[i], r, t, u, v)) h.offer(t, u, v, i);
        return h;
    }

    bool occluded(const Ray& r) const noexcept {
        double t, u, v;
        for (const auto& tri : g_.tris)
            if (intersect(tri, r, t, u, v)) return true;
        return false;
    }

private:
    const Geometry& g_;
};

class Bvh {
public:
    explicit Bvh(const Geometry& g) : g_(g) {
        const std::size_t n = g.tris.size();
        order_.resize(n);
        centroids_.resize(n);
        boxes_.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            const auto& t = g.tris[i];
            Aabb b;
            b.grow(t.v0);
            b.grow(t.v0 + t.e1);
            b.grow(t.v0 + t.e2);
            boxes_[i] = b;
            centroids_[i] = b.center();
            order_[i] = i;
        }
        if (n == 0) return;
        nodes_.reserve(2 * n);
        nodes_.emplace_back();
        build(0, 0, static_cast<std::uint32_t>(n));
    }

    Hit closest(const Ray& r) const noexcept {
        Hit h;
        if (nodes_.empty()) return h;
        const Vec3 inv = inverse(r.d);
        std::uint32_t stack[96];
        int top = 0;
        stack[top++] = 0;
        double t, u, v;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (!slab(node, r, inv, h.t)) continue;
            if (node.count > 0) {
                for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
                    const std::uint32_t i = order_[k];
                    if (intersect(g_.tris[i], r, t, u, v)) h.offer(t, u, v, i);
                }
            } else {
                stack[top++] = node.first + 1;
                stack[top++] = node.first;
            }
        }
        return h;
    }

    bool occluded(const Ray& r) const noexcept {
        if (nodes_.empty()) return false;
        const Vec3 inv = inverse(r.d);
        std::uint32_t stack[96];
        int top = 0;
        stack[top++] = 0;
        double t, u, v;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (!slab(node, r, inv, kInf)) continue;
            if (node.count > 0) {
                for (std::uint32_t k = node.first; k < node.first + node.count; ++k)
                    if (intersect(g_.tris[order_[k]], r, t, u, v)) return true;
            } else {
                stack[top++] = node.first + 1;
                stack[top++] = node.first;
            }
        }
        return false;
    }

private:
    struct Node {
        Vec3 lo, hi;
        std::uint32_t first = 0;  // leaf: offset into order_; interior: left child (right = first + 1)
        std::uint32_t count = 0;  // 0 for interior nodes
    };

    static constexpr std::uint32_t kLeafSize = 4;

    static Vec3 inverse(Vec3 d) noexcept { return {1.0 / d.x, 1.0 / d.y, 1.0 / d.z}; }

    void build(std::uint32_t index, std::uint32_t begin, std::uint32_t end) {
        Aabb box, cbox;
        for (std::uint32_t k = begin; k < end; ++k) {
            box.grow(boxes_[order_[k]]);
            cbox.grow(centroids_[order_[k]]);
        }
        // Padding keeps rounding in the slab test from culling a box whose
        // triangle the ray does hit.
        const Vec3 ext = box.extent();
        const double pad = 1e-9 * (1.0 + std::max({ext.x, ext.y, ext.z, std::abs(box.lo.x), std::abs(box.lo.y),
                                                   std::abs(box.lo.z), std::abs(box.hi.x), std::abs(box.hi.y),
                                                   std::abs(box.hi.z)}));
        nodes_[index].lo = box.lo - Vec3{pad, pad, pad};
        nodes_[index].hi = box.hi + Vec3{pad, pad, pad};

        if (end - begin <= kLeafSize) {
            nodes_[index].first = begin;
            nodes_[index].count = end - begin;
            return;
        }
        const Vec3 ce = cbox.extent();
        const int axis = ce.x >= ce.y && ce.x >= ce.z ? 0 : (ce.y >= ce.z ? 1 : 2);
        const std::uint32_t mid = begin + (end - begin) / 2;
        auto key = [&](std::uint32_t i) {
            const Vec3& c = centroids_[i];
            return axis == 0 ? c.x : (axis == 1 ? c.y : c.z);
        };
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) {
                             const double ka = key(a), kb = key(b);
                             return ka < kb || (ka == kb && a < b);
                         });
        const auto left = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();
        nodes_.emplace_back();
        nodes_[index].first = left;
        nodes_[index].count = 0;
        build(left, begin, mid);
        build(left + 1, mid, end);
    }

    static bool slab(const Node& n, const Ray& r, Vec3 inv, double t_max) noexcept {
        double t0 = 0.0, t1 = t_max;
        const double o[3] = {r.o.x, r.o.y, r.o.z};
        const double d[3] = {r.d.x, r.d.y, r.d.z};
        const double iv[3] = {inv.x, inv.y, inv.z};
        const double lo[3] = {n.lo.x, n.lo.y, n.lo.z};
        const double hi[3] = {n.hi.x, n.hi.y, n.hi.z};
        for (int a = 0; a < 3; ++a) {
            if (d[a] == 0.0) {
                if (o[a] < lo[a] || o[a] > hi[a]) return false;
                continue;
            }
            double ta = (lo[a] - o[a]) * iv[a];
            double tb = (hi[a] - o[a]) * iv[a];
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
            if (t0 > t1) return false;
        }
        return true;
    }

    const Geometry& g_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
    std::vector<Vec3> centroids_;
    std::vector<Aabb> boxes_;
};

// What a primary ray sees.
struct Surface {
    enum class Kind { None, Plane, Object } kind = Kind::None;
    Vec3 p;
    double t = kInf;
    Hit hit;
};

template <class Accel>
Surface trace(const Accel& accel, const Ray& r) {
    Surface s;
    s.hit = accel.closest(r);
    double plane_t = kInf;
    if (r.d.z < 0.0) {
        plane_t = -r.o.z / r.d.z;
        if (!(plane_t > kRayEps)) plane_t = kInf;
    }
    if (s.hit.tri != kNone && s.hit.t <= plane_t) {
        s.kind = Surface::Kind::Object;
        s.t = s.hit.t;
    } else if (plane_t < kInf) {
        s.kind = Surface::Kind::Plane;
        s.t = plane_t;
    }
    if (s.kind != Surface::Kind::None) s.p = r.o + r.d * s.t;
    if (s.kind == Surface::Kind::Plane) s.p.z = 0.0;
    return s;
}

std::uint16_t label_of(const Geometry& g, const Surface& s) {
    switch (s.kind) {
        case Surface::Kind::None: return SegmentationMask::kBackground;
        case Surface::Kind::Plane: return SegmentationMask::kPlane;
        case Surface::Kind::Object: return g.objects[g.tris[s.hit.tri].object].id;
    }
    return SegmentationMask::kBackground;
}

struct FloorLookup {
    int width = 0, height = 0;
    double tiling = 1.0;
    std::vector<Vec3> texels;  // linear

    Vec3 sample(double x, double y) const noexcept {
        if (texels.empty()) return {0.5, 0.5, 0.5};
        // Bilinear with wrap-around; texel centers at half-integers.
        const double u = x / tiling * width - 0.5;
        const double v = y / tiling * height - 0.5;
        const double fu = std::floor(u), fv = std::floor(v);
        const double au = u - fu, av = v - fv;
        auto wrap = [](long i, int n) { return static_cast<int>(((i % n) + n) % n); };
        const int x0 = wrap(static_cast<long>(fu), width), x1 = wrap(static_cast<long>(fu) + 1, width);
        const int y0 = wrap(static_cast<long>(fv), height), y1 = wrap(static_cast<long>(fv) + 1, height);
        auto at = [&](int i, int j) { return texels[static_cast<std::size_t>(j) * width + i]; };
        return (at(x0, y0) * (1 - au) + at(x1, y0) * au) * (1 - av) + (at(x0, y1) * (1 - au) + at(x1, y1) * au) * av;
    }
};

FloorLookup make_floor(const Catalog& catalog, const std::string& floor_id) {
    FloorLookup f;
    const FloorTexture* tex = catalog.find_floor(floor_id);
    if (!tex || tex->image.empty()) return f;
    f.width = tex->image.width;
    f.height = tex->image.height;
    f.tiling = tex->tiling > 0 ? tex->tiling : 1.0;
    double lut[256];
    for (int i = 0; i < 256; ++i) lut[i] = std::pow(i / 255.0, 2.2);
    f.texels.resize(static_cast<std::size_t>(f.width) * f.height);
    for (int j = 0; j < f.height; ++j)
        for (int i = 0; i < f.width; ++i) {
            // Image row 0 is the top; texture v grows with world y.
            const std::uint8_t* px = tex->image.at(i, f.height - 1 - j);
            f.texels[static_cast<std::size_t>(j) * f.width + i] = {lut[px[0]], lut[px[1]], lut[px[2]]};
        }
    return f;
}

Vec3 pattern_albedo(const Material& m, Vec3 local) {
    if (m.pattern == Pattern::Solid) return m.color;
    // A small fixed shift keeps axis-aligned faces off the cell boundaries.
    const double s = m.pattern_scale > 0 ? m.pattern_scale : 0.25;
    const Vec3 q = (local + Vec3{0.0137, 0.0291, 0.0113}) * (1.0 / s);
    long parity = 0;
    if (m.pattern == Pattern::Stripes)
        parity = static_cast<long>(std::floor(q.z));
    else
        parity = static_cast<long>(std::floor(q.x)) + static_cast<long>(std::floor(q.y)) +
                 static_cast<long>(std::floor(q.z));
    return (parity & 1) ? m.color2 : m.color;
}

struct Light {
    Vec3 to_light;
    Vec3 radiance;
    bool shadow;
};

struct Shader {
    const Geometry* g;
    const FloorLookup* floor;
    std::vector<Light> lights;
    Vec3 ambient;
    Vec3 background;

    template <class Accel>
    Vec3 shade(const Accel& accel, const Ray& r, const Surface& s, bool shadows) const {
        if (s.kind == Surface::Kind::None) return background;
        Vec3 n, ng, albedo;
        if (s.kind == Surface::Kind::Plane) {
            n = ng = {0, 0, 1};
            albedo = floor->sample(s.p.x, s.p.y);
        } else {
            const WorldTri& tri = g->tris[s.hit.tri];
            const ObjectInfo& obj = g->objects[tri.object];
            ng = tri.normal;
            n = ng;
            const TriMesh& mesh = *obj.mesh;
            if (mesh.smooth && mesh.normals.size() == mesh.vertices.size()) {
                const double w0 = 1 - s.hit.u - s.hit.v;
                const Vec3 ln = mesh.normals[tri.vi[0]] * w0 + mesh.normals[tri.vi[1]] * s.hit.u +
                                mesh.normals[tri.vi[2]] * s.hit.v;
                const Vec3 wn = obj.rotation.rotate(ln);
                if (dot(wn, wn) > 0) n = normalize(wn);
            }
            const Vec3 local = obj.inverse_rotation.rotate(s.p - obj.translation) * obj.inverse_scale;
            albedo = pattern_albedo(*obj.material, local);
        }
        if (dot(ng, r.d) > 0) {
            ng = -ng;
            n = -n;
        }
        Vec3 e = ambient;
        for (const Light& l : lights) {
            const double c = dot(n, l.to_light);
            if (c <= 0) continue;
            if (shadows && l.shadow) {
                if (dot(ng, l.to_light) <= 0) continue;
                if (accel.occluded({s.p + ng * kShadowLift, l.to_light})) continue;
            }
            e = e + l.radiance * c;
        }
        return {albedo.x * e.x, albedo.y * e.y, albedo.z * e.z};
    }
};

Shader make_shader(const Geometry& g, const FloorLookup& floor, const SceneSpec& scene, const RenderSettings& rs) {
    Shader sh{&g, &floor, {}, {0, 0, 0}, rs.background};
    const LightingRig& rig = scene.lighting;
    if (rs.ambient) sh.ambient = rig.ambient;
    auto add = [&](const DirectionalLight& l) {
        if (!(l.intensity > 0) || dot(l.direction, l.direction) == 0) return;
        sh.lights.push_back({normalize(-l.direction), l.color * l.intensity, l.casts_shadow});
    };
    if (rs.directional) add(rig.directional);
    if (rs.rig) {
        add(rig.key.light);
        add(rig.fill.light);
        add(rig.back.light);
    }
    return sh;
}

Camera camera_for(const SceneSpec& scene, const RenderSettings& rs) {
    Camera c = scene.camera;
    c.resolution = rs.resolution;
    return c;
}

ImageCoord pixel_center(int px, int py, int w, int h) noexcept {
    return {(px + 0.5) / w, 1.0 - (py + 0.5) / h};
}

template <class Accel>
Vec3 pixel_radiance(const Accel& accel, const Shader& sh, const CameraFrame& frame, const RenderSettings& rs,
                    std::uint64_t seed, int px, int py) {
    const int w = rs.resolution.width, h = rs.resolution.height;
    const int spp = rs.samples_per_pixel;
    const int gx = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(spp))));
    const int gy = (spp + gx - 1) / gx;
    const std::uint64_t pixel_key = hash_combine(seed, static_cast<std::uint64_t>(py) * w + px);
    Vec3 sum{0, 0, 0};
    for (int s = 0; s < spp; ++s) {
        double ju = 0.5, jv = 0.5;
        if (rs.jitter) {
            Rng rng(hash_combine(pixel_key, static_cast<std::uint64_t>(s)));
            ju = rng.uniform();
            jv = rng.uniform();
        }
        const double sx = (s % gx + ju) / gx;
        const double sy = (s / gx + jv) / gy;
        const ImageCoord c{(px + sx) / w, 1.0 - (py + sy) / h};
        const Ray r{frame.origin, frame.ray_direction(c)};
        sum = sum + sh.shade(accel, r, trace(accel, r), rs.shadows);
    }
    return sum * (1.0 / spp);
}

template <class Accel>
std::uint16_t pixel_label(const Accel& accel, const Geometry& g, const CameraFrame& frame, int px, int py, int w,
                          int h) {
    const Ray r{frame.origin, frame.ray_direction(pixel_center(px, py, w, h))};
    return label_of(g, trace(accel, r));
}

int worker_count(const RenderSettings& rs) { return rs.threads > 0 ? rs.threads : omp_get_max_threads(); }

}  // namespace

RadianceImage render_radiance(const SceneSpec& scene, const Catalog& catalog, const RenderSettings& settings,
                              std::uint64_t seed) {
    settings.validate();
    const Geometry g = build_geometry(scene);
    const Bvh bvh(g);
    const FloorLookup floor = make_floor(catalog, scene.floor_id);
    const Shader sh = make_shader(g, floor, scene, settings);
    const CameraFrame frame = camera_frame(camera_for(scene, settings));
    const int w = settings.resolution.width, h = settings.resolution.height;
    RadianceImage out{w, h, std::vector<Vec3>(static_cast<std::size_t>(w) * h)};
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count(settings))
    for (int py = 0; py < h; ++py)
        for (int px = 0; px < w; ++px)
            out.pixels[static_cast<std::size_t>(py) * w + px] = pixel_radiance(bvh, sh, frame, settings, seed, px, py);
    return out;
}

SegmentationMask render_mask_only(const SceneSpec& scene, const RenderSettings& settings) {
    settings.validate();
    const Geometry g = build_geometry(scene);
    const Bvh bvh(g);
    const CameraFrame frame = camera_frame(camera_for(scene, settings));
    const int w = settings.resolution.width, h = settings.resolution.height;
    SegmentationMask mask(w, h);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count(settings))
    for (int py = 0; py < h; ++py)
        for (int px = 0; px < w; ++px)
            mask.labels[static_cast<std::size_t>(py) * w + px] = pixel_label(bvh, g, frame, px, py, w, h);
    return mask;
}

Image encode_gamma(const RadianceImage& radiance, double gamma) {
    Image img(radiance.width, radiance.height);
    const double inv = 1.0 / gamma;
    auto encode = [inv](double v) {
        const double c = std::pow(std::clamp(v, 0.0, 1.0), inv);
        return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
    };
    for (std::size_t i = 0; i < radiance.pixels.size(); ++i) {
        const Vec3& p = radiance.pixels[i];
        img.pixels[3 * i + 0] = encode(p.x);
        img.pixels[3 * i + 1] = encode(p.y);
        img.pixels[3 * i + 2] = encode(p.z);
    }
    return img;
}

RenderOutput render(const SceneSpec& scene, const Catalog& catalog, const RenderSettings& settings,
                    std::uint64_t seed) {
    return {encode_gamma(render_radiance(scene, catalog, settings, seed), settings.gamma),
            render_mask_only(scene, settings)};
}

double visible_fraction(const SegmentationMask& mask, std::uint16_t instance_id) noexcept {
    if (mask.labels.empty()) return 0.0;
    const auto n = std::count(mask.labels.begin(), mask.labels.end(), instance_id);
    return static_cast<double>(n) / static_cast<double>(mask.labels.size());
}

namespace reference {

RadianceImage render_radiance(const SceneSpec& scene, const Catalog& catalog, const RenderSettings& settings,
                              std::uint64_t seed) {
    settings.validate();
    const Geometry g = build_geometry(scene);
    const BruteForce brute(g);
    const FloorLookup floor = make_floor(catalog, scene.floor_id);
    const Shader sh = make_shader(g, floor, scene, settings);
    const CameraFrame frame = camera_frame(camera_for(scene, settings));
    const int w = settings.resolution.width, h = settings.resolution.height;
    RadianceImage out{w, h, std::vector<Vec3>(static_cast<std::size_t>(w) * h)};
    for (int py = 0; py < h; ++py)
        for (int px = 0; px < w; ++px)
            out.pixels[static_cast<std::size_t>(py) * w + px] =
                pixel_radiance(brute, sh, frame, settings, seed, px, py);
    return out;
}

SegmentationMask render_mask_only(const SceneSpec& scene, const RenderSettings& settings) {
    settings.validate();
    const Geometry g = build_geometry(scene);
    const BruteForce brute(g);
    const CameraFrame frame = camera_frame(camera_for(scene, settings));
    const int w = settings.resolution.width, h = settings.resolution.height;
    SegmentationMask mask(w, h);
    for (int py = 0; py < h; ++py)
        for (int px = 0; px < w; ++px)
            mask.labels[static_cast<std::size_t>(py) * w + px] = pixel_label(brute, g, frame, px, py, w, h);
    return mask;
}

}  // namespace reference

}  // namespace forge
