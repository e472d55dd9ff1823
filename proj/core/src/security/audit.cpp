#include "actordb/security/audit.hpp"

#include <nlohmann/json.hpp>

namespace actordb::security {

using nlohmann::json;

std::uint64_t AuditLog::append(AuditRecord record) {
  std::lock_guard lock(mu_);
  record.seq = next_seq_++;
  if (capacity_ == 0) return record.seq;
  if (records_.size() == capacity_) records_.pop_front();
  records_.push_back(std::move(record));
  return records_.back().seq;
}

std::vector<AuditRecord> AuditLog::tail(std::size_t n) const {
  std::lock_guard lock(mu_);
  n = std::min(n, records_.size());
  return {records_.end() - static_cast<std::ptrdiff_t>(n), records_.end()};
}

std::uint64_t AuditLog::total() const {
  std::lock_guard lock(mu_);
  return next_seq_ - 1;
}

void AuditLog::clear() {
  std::lock_guard lock(mu_);
  records_.clear();
}

std::string to_json_line(const AuditRecord& r) {
  json j;
  j["seq"] = r.seq;
  j["time_us"] = r.time_us;
  if (r.caller)
    j["caller"] = {{"type", r.caller->actor.type_name}, {"name", r.caller->actor.actor_name}, {"method", r.caller->method}};
  else
    j["caller"] = "external";
  j["target"] = {{"type", r.target.actor.type_name}, {"name", r.target.actor.actor_name}, {"method", r.target.method}};
  j["decision"] = to_string(r.decision);
  j["txn"] = r.txn;
  if (!r.note.empty()) j["note"] = r.note;
  return j.dump();
}

std::string to_json_lines(const std::vector<AuditRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json_line(r) + "\n";
  return out;
}

AuditRecord audit_from_json(const std::string& line) {
  json j = json::parse(line);
  AuditRecord r;
  r.seq = j.at("seq");
  r.time_us = j.at("time_us");
  if (j.at("caller").is_object()) {
    const auto& c = j["caller"];
    r.caller = CallerFrame{{c.at("type"), c.at("name")}, c.at("method")};
  }
  const auto& t = j.at("target");
  r.target = CallTarget{{t.at("type"), t.at("name")}, t.at("method")};
  r.decision = j.at("decision") == "allow" ? Decision::Allow : Decision::Deny;
  r.txn = j.at("txn");
  r.note = j.value("note", "");
  return r;
}

}  // namespace actordb::security
