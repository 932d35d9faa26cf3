/*
 * Copyright (c) 2026 The TecCoBot Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Encrypted envelopes routed between named service nodes.
//
// Keys: every node holds an X25519 box keypair and an Ed25519 signing
// keypair; its public key is box_pk || sign_pk (64 bytes). seal() encrypts
// the payload with a fresh XChaCha20-Poly1305 content key, wraps that key
// in a sealed box for the recipient and signs the envelope.
//
// Wire frame: 4-byte big-endian length, then the CBOR-encoded envelope.
// Delivery is at-least-once; consumers drop repeats by envelope_id.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "teccobot/blocking_queue.hpp"
#include "teccobot/hashing.hpp"

namespace teccobot {

inline constexpr std::size_t kPublicKeySize = 64;
inline constexpr std::size_t kMaxFrameSize = 64u << 20;

struct NodeIdentity {
    std::string node_id;
    Bytes public_key;

    std::span<const std::uint8_t> box_public_key() const;
    std::span<const std::uint8_t> sign_public_key() const;
    /// Length and curve point checks.
    bool well_formed() const;

    bool operator==(const NodeIdentity&) const = default;
};

/// A node's key material. Secret keys never leave this object except
/// through serialize().
class NodeKeys {
public:
    /// Throws Error(InvalidArgument) for an empty id or one with whitespace.
    static NodeKeys generate(const std::string& node_id);

    const NodeIdentity& identity() const noexcept { return identity_; }
    const std::string& node_id() const noexcept { return identity_.node_id; }

    /// Text key file: "teccobot-node-key v1\n<id> <box_pk> <box_sk> <sign_sk>\n".
    std::string serialize() const;
    /// Throws Error(ParseError).
    static NodeKeys deserialize(std::string_view text);
    /// Loads the key file, or generates and writes one if it does not exist.
    static NodeKeys load_or_create(const std::filesystem::path& path, const std::string& node_id);

    NodeKeys(const NodeKeys&) = default;
    NodeKeys& operator=(const NodeKeys&) = default;
    ~NodeKeys();

private:
    NodeKeys() = default;
    friend struct NodeKeysAccess;

    NodeIdentity identity_;
    Bytes box_secret_;
    Bytes sign_secret_;
};

/// node_id -> public key. Reads are concurrent, registration is serialized.
class Registry {
public:
    Registry() = default;
    Registry(const Registry& other);
    Registry& operator=(const Registry& other);

    /// Throws Error(DuplicateNodeId), Error(InvalidArgument) for a malformed key.
    void register_node(const NodeIdentity& identity);
    std::optional<NodeIdentity> find(std::string_view node_id) const;
    /// Throws Error(UnknownRecipient).
    NodeIdentity get(std::string_view node_id) const;
    std::vector<NodeIdentity> nodes() const;

    /// "teccobot-registry v1\n" then "<node_id> <hex key>\n" per node, sorted.
    std::string to_text() const;
    /// Throws Error(ParseError) or Error(DuplicateNodeId).
    static Registry parse(std::string_view text);

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, NodeIdentity, std::less<>> nodes_;
};

/// Fresh keys for node_id, registered in the registry.
/// Throws Error(DuplicateNodeId) on collision.
NodeKeys generate_identity(Registry& registry, const std::string& node_id);

struct Envelope {
    std::string envelope_id;
    std::string sender;
    std::string recipient;
    Bytes wrapped_key;
    Bytes ciphertext;
    Bytes nonce;
    Bytes signature;

    bool operator==(const Envelope&) const = default;
};

/// Throws Error(UnknownRecipient).
Envelope seal(const NodeKeys& sender, const Registry& registry, const std::string& recipient_id,
              std::span<const std::uint8_t> payload);

/// Throws Error(NotRecipient), Error(SignatureInvalid) (also for an
/// unregistered sender), Error(DecryptionFailure).
Bytes open(const NodeKeys& recipient, const Registry& registry, const Envelope& e);

/// Canonical CBOR encoding (sorted keys, binary fields).
Bytes encode_envelope(const Envelope& e);
/// Throws Error(MalformedEnvelope).
Envelope decode_envelope(std::span<const std::uint8_t> bytes);

/// Length-prefixed frame around an encoded envelope.
Bytes frame_envelope(const Envelope& e);
/// Throws Error(MalformedEnvelope) on a bad prefix or body.
Envelope unframe_envelope(std::span<const std::uint8_t> frame);

/// Sealed-box encryption to a node's public key, for data at rest.
Bytes encrypt_for(const NodeIdentity& recipient, std::span<const std::uint8_t> plaintext);
/// Throws Error(DecryptionFailure).
Bytes decrypt_with(const NodeKeys& keys, std::span<const std::uint8_t> sealed);

// ------------------------------------------------------------ transport

using FrameHandler = std::function<void(const Bytes& frame)>;

class Transport {
public:
    virtual ~Transport() = default;
    /// One delivery attempt of a whole frame. Throws Error(Unreachable).
    virtual void deliver(const std::string& node_id, const Bytes& frame) = 0;
};

/// Direct in-process delivery with fault injection for tests.
class InProcessTransport : public Transport {
public:
    void attach(const std::string& node_id, FrameHandler handler);
    void detach(const std::string& node_id);
    void set_offline(const std::string& node_id, bool offline);
    /// The next `count` deliveries to node_id reach the handler but report
    /// failure to the sender, as when an acknowledgment is lost.
    void drop_acks(const std::string& node_id, int count);

    void deliver(const std::string& node_id, const Bytes& frame) override;

private:
    std::mutex mutex_;
    std::map<std::string, FrameHandler> handlers_;
    std::set<std::string> offline_;
    std::map<std::string, int> dropped_acks_;
};

/// Loopback TCP listener: accepts frames and acknowledges each with one
/// byte once the handler returns.
class TcpListener {
public:
    /// Port 0 picks an ephemeral port. Throws Error(IoError).
    TcpListener(std::string host, std::uint16_t port, FrameHandler handler);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const noexcept { return port_; }
    void stop();

private:
    void run();

    int fd_ = -1;
    std::uint16_t port_ = 0;
    FrameHandler handler_;
    std::atomic<bool> stopping_{false};
    std::thread thread_;
};

class TcpTransport : public Transport {
public:
    explicit TcpTransport(std::chrono::milliseconds io_timeout = std::chrono::milliseconds(2000))
        : io_timeout_(io_timeout) {}

    void set_endpoint(const std::string& node_id, std::string host, std::uint16_t port);
    void deliver(const std::string& node_id, const Bytes& frame) override;

private:
    std::mutex mutex_;
    std::map<std::string, std::pair<std::string, std::uint16_t>> endpoints_;
    std::chrono::milliseconds io_timeout_;
};

// ------------------------------------------------------------ routing

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds backoff{50};
    double multiplier = 2.0;
};

struct DeliveryReceipt {
    std::string envelope_id;
    std::string recipient;
    int attempts = 0;
};

/// Sends envelopes to their recipient, directly or through a relay hop.
class Router {
public:
    Router(const Registry& registry, Transport& transport, RetryPolicy policy = {}, std::string via = {})
        : registry_(registry), transport_(transport), policy_(policy), via_(std::move(via)) {}

    /// Throws Error(UnknownRecipient), Error(Unreachable) after the retries.
    DeliveryReceipt route(const Envelope& e);

private:
    const Registry& registry_;
    Transport& transport_;
    RetryPolicy policy_;
    std::string via_;
};

/// Forwarding node. Holds no recipient keys; every byte it handles is
/// kept in captured() so tests can inspect what a relay observes.
class RelayHop {
public:
    RelayHop(const Registry& registry, Transport& downstream, RetryPolicy policy = {}, bool capture = false)
        : router_(registry, downstream, policy), capture_(capture) {}

    /// Forwards synchronously; a failure propagates to the upstream sender.
    void on_frame(const Bytes& frame);
    std::vector<Bytes> captured() const;
    std::size_t forwarded() const noexcept { return forwarded_; }

private:
    Router router_;
    bool capture_;
    mutable std::mutex mutex_;
    std::vector<Bytes> captured_;
    std::atomic<std::size_t> forwarded_{0};
};

/// Remembers envelope ids already consumed.
class Deduplicator {
public:
    /// True the first time an id is seen.
    bool first_time(const std::string& envelope_id);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::set<std::string> seen_;
};

/// A node endpoint: keys, registry view and an inbox of received envelopes.
class RelayNode {
public:
    RelayNode(NodeKeys keys, const Registry& registry) : keys_(std::move(keys)), registry_(registry) {}

    const std::string& node_id() const noexcept { return keys_.node_id(); }
    const NodeKeys& keys() const noexcept { return keys_; }

    /// Handler suitable for a transport; malformed frames raise
    /// Error(MalformedEnvelope) back to the sender.
    FrameHandler handler();
    BlockingQueue<Envelope>& inbox() noexcept { return inbox_; }

    Envelope seal_to(const std::string& recipient_id, std::span<const std::uint8_t> payload) const;
    Bytes open(const Envelope& e) const;

private:
    NodeKeys keys_;
    const Registry& registry_;
    BlockingQueue<Envelope> inbox_;
};

}  // namespace teccobot
