#include <vector>

#include "routines.hpp"

namespace ska {
namespace {

using routines_detail::fill_bytes;
using routines_detail::require;
using routines_detail::ring_next;

enum class Pat { Pair, Pingpong, Ring };
enum class Shape { Bytes, Strided, Elem };

struct BlockSpec {
  Pat pat;
  Shape shape;
  bool is_get;
  bool calibrated;
};

// Blocking transfer scaffold shared by the put/get/iput/iget/p/g variants:
// buffers, deterministic payloads, untimed warm-up, synchronized start, and
// one timed loop whose body is the variant's transfer (+ quiet for puts).
RoutinePeResult run_blocking(Pe& pe, MeasureSession& session,
                             const std::vector<std::int64_t>& args,
                             const BlockSpec& sp) {
  std::int64_t count = 1, stride = 1, iters = 1;
  switch (sp.shape) {
    case Shape::Bytes:
      count = args[0];
      iters = args[1];
      break;
    case Shape::Strided:
      count = args[0];
      stride = args[1];
      iters = args[2];
      break;
    case Shape::Elem:
      iters = args[0];
      break;
  }
  std::uint64_t span = sp.shape == Shape::Bytes
                           ? static_cast<std::uint64_t>(count)
                       : sp.shape == Shape::Strided
                           ? static_cast<std::uint64_t>(stride) *
                                 static_cast<std::uint64_t>(count) * 8
                           : 8;

  bool active = false, measuring = false;
  int to = 0;
  switch (sp.pat) {
    case Pat::Pair:
      active = measuring = pe.rank() == 0;
      to = 1;
      break;
    case Pat::Pingpong:
      active = measuring = pe.rank() < 2;
      to = 1 - pe.rank();
      break;
    case Pat::Ring:
      active = measuring = true;
      to = ring_next(pe);
      break;
  }

  double qhat = sp.calibrated
                    ? MeasureSession::calibrate_empty_quiet(pe, kBaselineReps)
                    : 0.0;

  SymRef buf = pe.sym_malloc(span);
  std::vector<std::byte> local(span);
  fill_bytes(pe, pe.resolve(buf, pe.rank()), span, 11);
  fill_bytes(pe, local.data(), span, 12);
  pe.barrier();

  auto elem_val =
      static_cast<std::int64_t>(pe.deterministic_u64(13, 0) >> 1);
  std::int64_t g_sink = 0;

  auto step = [&] {
    switch (sp.shape) {
      case Shape::Bytes:
        if (sp.is_get) {
          pe.get(local.data(), buf, static_cast<std::uint64_t>(count), to);
        } else {
          pe.put(buf, local.data(), static_cast<std::uint64_t>(count), to);
          pe.quiet();
        }
        break;
      case Shape::Strided:
        if (sp.is_get) {
          pe.iget(local.data(), buf, static_cast<std::uint64_t>(stride),
                  static_cast<std::uint64_t>(stride),
                  static_cast<std::uint64_t>(count), to);
        } else {
          pe.iput(buf, local.data(), static_cast<std::uint64_t>(stride),
                  static_cast<std::uint64_t>(stride),
                  static_cast<std::uint64_t>(count), to);
          pe.quiet();
        }
        break;
      case Shape::Elem:
        if (sp.is_get) {
          g_sink ^= pe.g(buf, to);
        } else {
          pe.p(buf, elem_val, to);
          pe.quiet();
        }
        break;
    }
  };

  if (active)
    for (int w = 0; w < kWarmupIters; ++w) step();

  session.synchronized_start(pe);

  RoutinePeResult res;
  res.iterations = static_cast<std::uint64_t>(iters);
  res.subtract = qhat;
  res.calib = qhat;
  res.measured = measuring;
  if (active) {
    double t0 = pe.now();
    for (std::int64_t i = 0; i < iters; ++i) step();
    res.elapsed = pe.now() - t0;
  }
  (void)g_sink;
  pe.barrier();  // nobody frees while a peer still has transfers in flight
  pe.sym_free(buf);
  return res;
}

enum class NbiVariant { Post, Quiet, Full, Overlap };

// Non-blocking scaffold: ring pattern, every PE posts to its +1 neighbor.
// The variant decides which part of post/quiet falls inside the timed
// window; Overlap first measures the blocking reference time t_b, then
// busy-waits 2*t_b between posting and the timed quiet.
RoutinePeResult run_nbi(Pe& pe, MeasureSession& session,
                        const std::vector<std::int64_t>& args, bool is_get,
                        NbiVariant v) {
  auto n = static_cast<std::uint64_t>(args[0]);
  std::int64_t iters = args[1];
  int to = ring_next(pe);

  SymRef remote = pe.sym_malloc(n);     // put target / get source
  SymRef local_sym = pe.sym_malloc(n);  // non-blocking-get destination
  std::vector<std::byte> local(n);
  fill_bytes(pe, pe.resolve(remote, pe.rank()), n, 21);
  fill_bytes(pe, local.data(), n, 22);
  pe.barrier();

  auto post = [&] {
    if (is_get)
      pe.get_nbi(local_sym, remote, n, to);
    else
      pe.put_nbi(remote, local.data(), n, to);
  };

  RoutinePeResult res;
  res.iterations = static_cast<std::uint64_t>(iters);
  res.measured = true;

  double t_b = 0.0;
  if (v == NbiVariant::Overlap) {
    double qhat = MeasureSession::calibrate_empty_quiet(pe, kBaselineReps);
    double t0 = pe.now();
    for (int k = 0; k < kBaselineReps; ++k) {
      if (is_get) {
        pe.get(local.data(), remote, n, to);
      } else {
        pe.put(remote, local.data(), n, to);
        pe.quiet();
      }
    }
    t_b = (pe.now() - t0) / kBaselineReps;
    res.transfer_ref = is_get ? t_b : t_b - qhat;
    res.empty_quiet_ref = qhat;
  }

  for (int w = 0; w < kWarmupIters; ++w) {
    post();
    if (v == NbiVariant::Overlap) pe.spin_until(pe.now() + 2 * t_b);
    pe.quiet();
  }

  session.synchronized_start(pe);

  double acc = 0.0;
  for (std::int64_t i = 0; i < iters; ++i) {
    double t0;
    switch (v) {
      case NbiVariant::Post:
        t0 = pe.now();
        post();
        acc += pe.now() - t0;
        pe.quiet();
        break;
      case NbiVariant::Quiet:
        post();
        t0 = pe.now();
        pe.quiet();
        acc += pe.now() - t0;
        break;
      case NbiVariant::Full:
        t0 = pe.now();
        post();
        pe.quiet();
        acc += pe.now() - t0;
        break;
      case NbiVariant::Overlap:
        post();
        pe.spin_until(pe.now() + 2 * t_b);
        t0 = pe.now();
        pe.quiet();
        acc += pe.now() - t0;
        break;
    }
  }
  res.elapsed = acc;

  pe.barrier();
  pe.sym_free(local_sym);
  pe.sym_free(remote);
  return res;
}

void add_blocking(Registry& r, std::string name, Pat pat, Shape shape,
                  bool is_get, bool calibrated, Participants parts) {
  RoutineDef d;
  d.name = std::move(name);
  d.arity = shape == Shape::Bytes ? 2 : shape == Shape::Strided ? 3 : 1;
  d.participants = parts;
  d.calibrated = calibrated;
  bool needs_pair = pat == Pat::Pair || pat == Pat::Pingpong;
  d.validate = [needs_pair, shape](const std::vector<std::int64_t>& a,
                                   int npes) {
    if (needs_pair) require(npes >= 2, "needs at least 2 PEs");
    switch (shape) {
      case Shape::Bytes:
        require(a[0] >= 1, "count must be at least 1");
        require(a[1] >= 1, "iterations must be at least 1");
        break;
      case Shape::Strided:
        require(a[0] >= 1, "count must be at least 1");
        require(a[1] >= 1, "stride must be at least 1");
        require(a[2] >= 1, "iterations must be at least 1");
        break;
      case Shape::Elem:
        require(a[0] >= 1, "iterations must be at least 1");
        break;
    }
  };
  d.footprint = [shape](const std::vector<std::int64_t>& a,
                        int) -> std::uint64_t {
    switch (shape) {
      case Shape::Bytes:
        return static_cast<std::uint64_t>(a[0]);
      case Shape::Strided:
        return static_cast<std::uint64_t>(a[1]) *
               static_cast<std::uint64_t>(a[0]) * 8;
      case Shape::Elem:
        return 8;
    }
    return 0;
  };
  BlockSpec sp{pat, shape, is_get, calibrated};
  d.run = [sp](Pe& pe, MeasureSession& s,
               const std::vector<std::int64_t>& a) {
    return run_blocking(pe, s, a, sp);
  };
  r.add(std::move(d));
}

void add_nbi(Registry& r, std::string name, bool is_get, NbiVariant v) {
  RoutineDef d;
  d.name = std::move(name);
  d.arity = 2;
  d.participants = Participants::Ring;
  d.calibrated = false;
  d.validate = [](const std::vector<std::int64_t>& a, int) {
    require(a[0] >= 1, "count must be at least 1");
    require(a[1] >= 1, "iterations must be at least 1");
  };
  d.footprint = [](const std::vector<std::int64_t>& a, int) {
    return static_cast<std::uint64_t>(a[0]);
  };
  d.run = [is_get, v](Pe& pe, MeasureSession& s,
                      const std::vector<std::int64_t>& a) {
    return run_nbi(pe, s, a, is_get, v);
  };
  r.add(std::move(d));
}

}  // namespace

void register_pt2pt(Registry& r) {
  add_blocking(r, "Shmem_Put_Simple", Pat::Pair, Shape::Bytes, false, true,
               Participants::Pair01);
  add_blocking(r, "Shmem_Pingpong_Put_Put", Pat::Pingpong, Shape::Bytes, false,
               true, Participants::Pair01);
  add_blocking(r, "Shmem_Put_Round", Pat::Ring, Shape::Bytes, false, true,
               Participants::Ring);
  add_blocking(r, "Shmem_Put_Full", Pat::Ring, Shape::Bytes, false, false,
               Participants::Ring);
  add_blocking(r, "Shmem_Iput_Round", Pat::Ring, Shape::Strided, false, true,
               Participants::Ring);
  add_blocking(r, "Shmem_P_Simple", Pat::Pair, Shape::Elem, false, true,
               Participants::Pair01);
  add_blocking(r, "Shmem_P_Round", Pat::Ring, Shape::Elem, false, true,
               Participants::Ring);

  add_nbi(r, "Shmem_Put_Nonblocking_Post", false, NbiVariant::Post);
  add_nbi(r, "Shmem_Put_Nonblocking_Quiet", false, NbiVariant::Quiet);
  add_nbi(r, "Shmem_Put_Nonblocking_Full", false, NbiVariant::Full);
  add_nbi(r, "Shmem_Put_Nonblocking_Overlap", false, NbiVariant::Overlap);

  add_blocking(r, "Shmem_Get_Simple", Pat::Pair, Shape::Bytes, true, false,
               Participants::Pair01);
  add_blocking(r, "Shmem_Get_Round", Pat::Ring, Shape::Bytes, true, false,
               Participants::Ring);
  add_blocking(r, "Shmem_Iget_Round", Pat::Ring, Shape::Strided, true, false,
               Participants::Ring);
  add_blocking(r, "Shmem_G_Simple", Pat::Pair, Shape::Elem, true, false,
               Participants::Pair01);
  add_blocking(r, "Shmem_G_Round", Pat::Ring, Shape::Elem, true, false,
               Participants::Ring);

  add_nbi(r, "Shmem_Get_Nonblocking_Post", true, NbiVariant::Post);
  add_nbi(r, "Shmem_Get_Nonblocking_Quiet", true, NbiVariant::Quiet);
  add_nbi(r, "Shmem_Get_Nonblocking_Full", true, NbiVariant::Full);
  add_nbi(r, "Shmem_Get_Nonblocking_Overlap", true, NbiVariant::Overlap);
}

}  // namespace ska
