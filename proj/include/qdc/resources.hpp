// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "qdc/topology.hpp"
#include "qdc/workload.hpp"

namespace qdc {

/// What a stored EPR half turns into once its pair is consumed.
enum class PairRole {
  Cat,       // slot freed
  TpSource,  // slot freed and the data qubit leaves
  TpDest,    // slot becomes the arriving data qubit's home
  Transit,   // swap or distillation intermediate, freed when merged
};

std::string_view to_string(PairRole role);

/// Buffer slots a QPU regains when a pair in this role is consumed.
int role_gain(PairRole role);

struct HeldPair {
  int pair = -1;
  PairRole role = PairRole::Cat;
  bool operator==(const HeldPair&) const = default;
};

/// Per-QPU qubit accounting. `buffer_capacity` is the effective capacity: it
/// moves with teleported data qubits.
struct QpuState {
  int buffer_capacity = 0;
  int buffer_in_use = 0;
  int comm_total = 0;
  int comm_in_use = 0;
  int reserved_buffer = 0;
  std::vector<HeldPair> scheduled_pairs;

  int free_buffer() const { return buffer_capacity - buffer_in_use; }
  int avail_comm() const { return comm_total - comm_in_use; }

  /// Earmarks one buffer slot. Throws InvariantError when none is free.
  void hold(int pair, PairRole role);
  /// Releases a slot earmarked by `hold`. Throws InvariantError if absent.
  void drop(int pair, PairRole role);

  bool operator==(const QpuState&) const = default;
};

QpuState make_qpu_state(const QpuSpec& spec);

/// Free buffer now plus what every scheduled pair gives back on consumption.
int projected_buffer(const QpuState& state);

/// Plain inequality forms of the buffer conditions, for direct testing.
bool basic_buffer_condition(int free_buffer, int avail_comm, int threshold, bool in_front);
bool modified_buffer_condition(PairRole role, int projected_minus_reserved, int avail_comm,
                               int threshold, bool in_front);

struct SlotClaim {
  NodeId qpu = -1;
  PairRole role = PairRole::Cat;
  bool operator==(const SlotClaim&) const = default;
};

/// A generation request as seen by the condition checks.
struct PairRequest {
  int demand = -1;
  NodeId a = -1;
  NodeId b = -1;
  PairRole role_a = PairRole::Cat;
  PairRole role_b = PairRole::Cat;
  bool in_front = true;
  std::vector<SlotClaim> claims;                        // earmarked when scheduled
  std::vector<std::pair<NodeId, int>> own_reservation;  // ignored in reserved_buffer
};

PairRole role_at(const EprDemand& demand, NodeId qpu);

/// Request for a program demand: one slot at each endpoint in its own role.
PairRequest program_request(const EprDemand& demand, bool in_front);

struct OpenBatch {
  int id = -1;
  NodeId a = -1;
  NodeId b = -1;
};

struct ResourceView {
  const NetworkTopology& topology;
  const std::vector<QpuState>& qpus;  // indexed by node id
  const std::vector<int>& bsm_in_use;  // indexed by node id
  const Occupancy& occupancy;
  std::span<const OpenBatch> open_batches = {};
};

enum class ConditionMode {
  Basic,          // conditions 1-4 with free buffer
  Modified,       // conditions 1-5 with projected - reserved
  ResourcesOnly,  // conditions 1-3 plus storage
};

struct ConditionParams {
  ConditionMode mode = ConditionMode::Modified;
  int threshold = 0;  // <= 0 means comm_total of each QPU
  bool allow_combine = true;
  bool reservation = true;
};

enum class DecisionKind { Schedulable, Combinable, Blocked };
enum class BlockReason { None, Comm, Bsm, Channel, BufferThreshold, Storage };

std::string_view to_string(BlockReason reason);

struct Decision {
  DecisionKind kind = DecisionKind::Blocked;
  BlockReason reason = BlockReason::None;
  int batch = -1;
  std::optional<PathReservation> path;
  NodeId bsm_tor = -1;
  // Endpoints without a comm qubit or a free uplink slot.
  bool busy_a = false;
  bool busy_b = false;
};

/// ToR that supplies the BSM: the one with more free devices, ties to qpu_a's.
/// Returns -1 when neither has a free BSM.
NodeId choose_bsm_tor(const ResourceView& view, NodeId a, NodeId b);

Decision check_conditions(const PairRequest& request, const ResourceView& view,
                          const ConditionParams& params);

Decision check_basic_conditions(const EprDemand& demand, const ResourceView& view, int threshold,
                                bool in_front);
Decision check_modified_conditions(const EprDemand& demand, const ResourceView& view, int threshold,
                                   bool in_front);

/// A cross-rack demand rerouted through a proxy next to its busy endpoint.
struct SplitPlan {
  int original = -1;
  NodeId busy = -1;
  NodeId proxy = -1;
  NodeId far = -1;
  int distill_copies = 0;  // k - 1
  std::vector<std::pair<NodeId, int>> m;

  int m_at(NodeId qpu) const;
  bool operator==(const SplitPlan&) const = default;
};

/// Buffer slots stored at each involved QPU while a split is in progress.
std::vector<std::pair<NodeId, int>> split_requirements(NodeId busy, NodeId proxy, NodeId far,
                                                       int distill_k);

/// Proxy search for a cross-rack demand blocked at `busy` only. Candidates
/// are busy's rack-mates with a comm qubit and an uplink slot, most free comm
/// first then lowest id; the first with projected - reserved >= m everywhere
/// wins.
std::optional<SplitPlan> check_split_conditions(const EprDemand& demand, NodeId busy,
                                                const ResourceView& view, int distill_k,
                                                bool reservation);

void reserve_split(std::vector<QpuState>& qpus, const SplitPlan& plan);
/// Throws InvariantError on underflow.
void release_split(std::vector<QpuState>& qpus, const SplitPlan& plan);

struct SplitProgress {
  int total = 0;
  int scheduled = 0;
  bool reserved = false;
  bool operator==(const SplitProgress&) const = default;
};

/// Reserve on the first scheduled member, release after the last.
void settle_split_member(std::vector<QpuState>& qpus, const SplitPlan& plan,
                         SplitProgress& progress, bool reservation);

}  // namespace qdc
