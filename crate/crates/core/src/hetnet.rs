//! The heterogeneous user–tweet–topic network.
//!
//! Nodes carry a kind (`User`, `Tweet`, `Topic`) and a dense per-kind index assigned
//! in first-seen file order, so identical inputs always produce identical indices.
//! Edges come in three kinds: `Follows` (user→user), `Posts` (user→tweet, exactly one
//! per tweet) and `Contains` (tweet→topic, at most one per tweet; added later by the
//! topic-assignment stage). After construction the graph is immutable and safe to
//! share across read-only workers.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

/// Node kinds of the heterogeneous network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    User,
    Tweet,
    Topic,
}

/// A typed node handle: `(kind, dense per-kind index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId {
    pub kind: NodeKind,
    pub index: u32,
}

impl NodeId {
    pub fn user(index: u32) -> Self {
        NodeId { kind: NodeKind::User, index }
    }

    pub fn tweet(index: u32) -> Self {
        NodeId { kind: NodeKind::Tweet, index }
    }

    pub fn topic(index: u32) -> Self {
        NodeId { kind: NodeKind::Topic, index }
    }
}

/// Edge kinds of the heterogeneous network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Follows,
    Posts,
    Contains,
}

/// One user's profile metadata, as ingested from `users.jsonl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserRecord {
    pub id: String,
    pub followers_count: u64,
    pub friends_count: u64,
    pub statuses_count: u64,
    pub favourites_count: u64,
    pub description: String,
    pub url_in_description: bool,
    pub location_present: bool,
    pub profile_image: bool,
    pub background_image: bool,
    pub created_at: NaiveDate,
    /// Year → tweet count, feeding the activity-skew feature.
    pub tweet_year_counts: BTreeMap<i32, u64>,
}

/// One tweet with its per-tweet content counts, as ingested from `tweets.jsonl`.
/// `user` has already been resolved to a dense user index.
#[derive(Debug, Clone)]
pub struct TweetRecord {
    pub user: u32,
    pub tweet_id: String,
    pub text: String,
    pub is_retweet: bool,
    pub n_emojis: u32,
    pub n_urls: u32,
    pub n_mentions: u32,
    pub n_words: u32,
    pub n_hashtags: u32,
    pub embedding: Option<Vec<f64>>,
}

/// Wire form of a tweet record (user referenced by string id).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TweetRecordRaw {
    pub user: String,
    pub tweet_id: String,
    pub text: String,
    pub is_retweet: bool,
    pub n_emojis: u32,
    pub n_urls: u32,
    pub n_mentions: u32,
    pub n_words: u32,
    pub n_hashtags: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
}

/// Wire form of a follow edge: `src` follows `dst`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FollowRecord {
    pub src: String,
    pub dst: String,
}

/// Compressed sparse adjacency: `targets[offsets[i]..offsets[i+1]]` are the
/// neighbors of source `i`, in ascending index order.
#[derive(Debug, Clone, Default)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    /// Build from (src, dst) pairs. Pairs are sorted; duplicates are collapsed.
    pub fn from_pairs(n_src: usize, mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = Vec::with_capacity(n_src + 1);
        let mut targets = Vec::with_capacity(pairs.len());
        offsets.push(0);
        let mut cursor = 0usize;
        for src in 0..n_src as u32 {
            while cursor < pairs.len() && pairs[cursor].0 == src {
                targets.push(pairs[cursor].1);
                cursor += 1;
            }
            offsets.push(targets.len());
        }
        Csr { offsets, targets }
    }

    pub fn neighbors(&self, i: u32) -> &[u32] {
        let i = i as usize;
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn source_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// The heterogeneous network plus the raw records it was built from.
#[derive(Debug, Clone)]
pub struct HetNet {
    users: Vec<UserRecord>,
    tweets: Vec<TweetRecord>,
    user_index: HashMap<String, u32>,
    tweet_index: HashMap<String, u32>,

    follows_out: Csr,
    follows_in: Csr,
    posts_out: Csr,
    /// Tweet → author index (the single incoming Posts edge).
    tweet_author: Vec<u32>,
    /// Tweet → topic index, filled in by topic assignment.
    tweet_topic: Vec<Option<u32>>,
    topic_tweets: Csr,
    topic_count: usize,

    /// Sorted user indices with known ground truth; subgraph endpoints.
    labeled: Vec<u32>,
    /// User index → position in `labeled`, if labeled.
    labeled_pos: Vec<Option<u32>>,
}

impl HetNet {
    /// Load the network from the three line-delimited input files.
    ///
    /// User indices follow `users.jsonl` order, tweet indices follow `tweets.jsonl`
    /// order. Duplicate user or tweet ids and follow/post references to ids absent
    /// from the users file are errors. Duplicate follow edges collapse to one and
    /// self-follows are ignored (follow relations are sets without self-loops).
    pub fn load(users_path: &Path, follows_path: &Path, tweets_path: &Path) -> Result<HetNet> {
        let users: Vec<UserRecord> = jsonl::read(users_path)?;
        let mut user_index = HashMap::with_capacity(users.len());
        for (i, u) in users.iter().enumerate() {
            match user_index.entry(u.id.clone()) {
                Entry::Vacant(v) => {
                    v.insert(i as u32);
                }
                Entry::Occupied(_) => {
                    return Err(Error::data(format!(
                        "{}: duplicate user id \"{}\"",
                        users_path.display(),
                        u.id
                    )));
                }
            }
        }

        let mut follow_pairs: Vec<(u32, u32)> = Vec::new();
        jsonl::for_each(follows_path, |line, rec: FollowRecord| {
            let src = *user_index.get(&rec.src).ok_or_else(|| {
                Error::data(format!(
                    "{}:{line}: follow references unknown user id \"{}\"",
                    follows_path.display(),
                    rec.src
                ))
            })?;
            let dst = *user_index.get(&rec.dst).ok_or_else(|| {
                Error::data(format!(
                    "{}:{line}: follow references unknown user id \"{}\"",
                    follows_path.display(),
                    rec.dst
                ))
            })?;
            if src != dst {
                follow_pairs.push((src, dst));
            }
            Ok(())
        })?;

        let mut tweets: Vec<TweetRecord> = Vec::new();
        let mut tweet_index = HashMap::new();
        jsonl::for_each(tweets_path, |line, raw: TweetRecordRaw| {
            let user = *user_index.get(&raw.user).ok_or_else(|| {
                Error::data(format!(
                    "{}:{line}: tweet {} references unknown user id \"{}\"",
                    tweets_path.display(),
                    raw.tweet_id,
                    raw.user
                ))
            })?;
            match tweet_index.entry(raw.tweet_id.clone()) {
                Entry::Vacant(v) => {
                    v.insert(tweets.len() as u32);
                }
                Entry::Occupied(_) => {
                    return Err(Error::data(format!(
                        "{}:{line}: duplicate tweet id \"{}\"",
                        tweets_path.display(),
                        raw.tweet_id
                    )));
                }
            }
            tweets.push(TweetRecord {
                user,
                tweet_id: raw.tweet_id,
                text: raw.text,
                is_retweet: raw.is_retweet,
                n_emojis: raw.n_emojis,
                n_urls: raw.n_urls,
                n_mentions: raw.n_mentions,
                n_words: raw.n_words,
                n_hashtags: raw.n_hashtags,
                embedding: raw.embedding,
            });
            Ok(())
        })?;

        let n_users = users.len();
        let reverse_pairs: Vec<(u32, u32)> = follow_pairs.iter().map(|&(s, d)| (d, s)).collect();
        let follows_out = Csr::from_pairs(n_users, follow_pairs);
        let follows_in = Csr::from_pairs(n_users, reverse_pairs);

        let post_pairs: Vec<(u32, u32)> = tweets
            .iter()
            .enumerate()
            .map(|(t, rec)| (rec.user, t as u32))
            .collect();
        let posts_out = Csr::from_pairs(n_users, post_pairs);
        let tweet_author: Vec<u32> = tweets.iter().map(|t| t.user).collect();
        let tweet_topic = vec![None; tweets.len()];

        Ok(HetNet {
            labeled_pos: vec![None; n_users],
            users,
            tweets,
            user_index,
            tweet_index,
            follows_out,
            follows_in,
            posts_out,
            tweet_author,
            tweet_topic,
            topic_tweets: Csr::default(),
            topic_count: 0,
            labeled: Vec::new(),
        })
    }

    /// Declare which users have known ground truth. Subsequent subgraph builds use
    /// exactly these users (in ascending index order) as endpoints.
    pub fn mark_labeled<'a>(&mut self, ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
        let mut labeled = Vec::new();
        for id in ids {
            let idx = *self
                .user_index
                .get(id)
                .ok_or_else(|| Error::data(format!("label references unknown user id \"{id}\"")))?;
            labeled.push(idx);
        }
        labeled.sort_unstable();
        labeled.dedup();
        self.labeled_pos = vec![None; self.users.len()];
        for (pos, &idx) in labeled.iter().enumerate() {
            self.labeled_pos[idx as usize] = Some(pos as u32);
        }
        self.labeled = labeled;
        Ok(())
    }

    /// Mark every loaded user as labeled.
    pub fn mark_all_labeled(&mut self) {
        self.labeled = (0..self.users.len() as u32).collect();
        self.labeled_pos = (0..self.users.len() as u32).map(Some).collect();
    }

    /// Record the tweet→topic assignment produced by clustering. Replaces any
    /// previous assignment.
    pub fn set_topics(&mut self, topic_count: usize, assignments: &[(u32, u32)]) -> Result<()> {
        self.tweet_topic = vec![None; self.tweets.len()];
        let mut pairs = Vec::with_capacity(assignments.len());
        for &(tweet, topic) in assignments {
            if tweet as usize >= self.tweets.len() {
                return Err(Error::data(format!("topic assignment for unknown tweet index {tweet}")));
            }
            if topic as usize >= topic_count {
                return Err(Error::data(format!("topic index {topic} out of range (K={topic_count})")));
            }
            if self.tweet_topic[tweet as usize].is_some() {
                return Err(Error::data(format!("tweet index {tweet} assigned to more than one topic")));
            }
            self.tweet_topic[tweet as usize] = Some(topic);
            pairs.push((topic, tweet));
        }
        self.topic_tweets = Csr::from_pairs(topic_count, pairs);
        self.topic_count = topic_count;
        Ok(())
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn tweet_count(&self) -> usize {
        self.tweets.len()
    }

    pub fn topic_count(&self) -> usize {
        self.topic_count
    }

    pub fn user_record(&self, index: u32) -> &UserRecord {
        &self.users[index as usize]
    }

    pub fn tweet_record(&self, index: u32) -> &TweetRecord {
        &self.tweets[index as usize]
    }

    pub fn tweet_records(&self) -> &[TweetRecord] {
        &self.tweets
    }

    pub fn user_index_of(&self, id: &str) -> Option<u32> {
        self.user_index.get(id).copied()
    }

    pub fn topic_of_tweet(&self, tweet: u32) -> Option<u32> {
        self.tweet_topic[tweet as usize]
    }

    /// Labeled user indices in ascending order.
    pub fn labeled_users(&self) -> &[u32] {
        &self.labeled
    }

    /// Position of a user in the labeled ordering, if labeled.
    pub fn labeled_position(&self, user: u32) -> Option<u32> {
        self.labeled_pos[user as usize]
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        let count = match v.kind {
            NodeKind::User => self.users.len(),
            NodeKind::Tweet => self.tweets.len(),
            NodeKind::Topic => self.topic_count,
        };
        if (v.index as usize) < count {
            Ok(())
        } else {
            Err(Error::data(format!("unknown node {:?}#{}", v.kind, v.index)))
        }
    }

    /// All `w` with an edge `(v, w, kind)`, ascending by target index. Kinds that
    /// cannot originate at `v`'s node kind yield an empty sequence.
    pub fn out_neighbors(&self, v: NodeId, kind: EdgeKind) -> Result<Vec<NodeId>> {
        self.check_node(v)?;
        let out = match (v.kind, kind) {
            (NodeKind::User, EdgeKind::Follows) => self
                .follows_out
                .neighbors(v.index)
                .iter()
                .map(|&u| NodeId::user(u))
                .collect(),
            (NodeKind::User, EdgeKind::Posts) => self
                .posts_out
                .neighbors(v.index)
                .iter()
                .map(|&t| NodeId::tweet(t))
                .collect(),
            (NodeKind::Tweet, EdgeKind::Contains) => self.tweet_topic[v.index as usize]
                .iter()
                .map(|&k| NodeId::topic(k))
                .collect(),
            _ => Vec::new(),
        };
        Ok(out)
    }

    /// All `w` with an edge `(w, v, kind)`, ascending by source index.
    pub fn in_neighbors(&self, v: NodeId, kind: EdgeKind) -> Result<Vec<NodeId>> {
        self.check_node(v)?;
        let out = match (v.kind, kind) {
            (NodeKind::User, EdgeKind::Follows) => self
                .follows_in
                .neighbors(v.index)
                .iter()
                .map(|&u| NodeId::user(u))
                .collect(),
            (NodeKind::Tweet, EdgeKind::Posts) => {
                vec![NodeId::user(self.tweet_author[v.index as usize])]
            }
            (NodeKind::Topic, EdgeKind::Contains) => self
                .topic_tweets
                .neighbors(v.index)
                .iter()
                .map(|&t| NodeId::tweet(t))
                .collect(),
            _ => Vec::new(),
        };
        Ok(out)
    }

    /// Raw follow adjacency, `user -> users they follow`.
    pub fn follows_out(&self) -> &Csr {
        &self.follows_out
    }

    /// Raw follow adjacency, `user -> users following them`.
    pub fn follows_in(&self) -> &Csr {
        &self.follows_in
    }

    /// Tweets posted by a user, ascending tweet index.
    pub fn tweets_of(&self, user: u32) -> &[u32] {
        self.posts_out.neighbors(user)
    }

    pub fn follow_edge_count(&self) -> usize {
        self.follows_out.edge_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use tempfile::TempDir;

    pub(crate) fn user_line(id: &str) -> String {
        format!(
            concat!(
                "{{\"id\":\"{id}\",\"followers_count\":10,\"friends_count\":5,",
                "\"statuses_count\":3,\"favourites_count\":1,\"description\":\"\",",
                "\"url_in_description\":false,\"location_present\":false,",
                "\"profile_image\":true,\"background_image\":false,",
                "\"created_at\":\"2019-05-01\",\"tweet_year_counts\":{{\"2020\":3}}}}"
            ),
            id = id
        )
    }

    fn tweet_line(user: &str, tid: &str) -> String {
        format!(
            concat!(
                "{{\"user\":\"{user}\",\"tweet_id\":\"{tid}\",\"text\":\"hello world\",",
                "\"is_retweet\":false,\"n_emojis\":0,\"n_urls\":0,\"n_mentions\":0,",
                "\"n_words\":2,\"n_hashtags\":0}}"
            ),
            user = user,
            tid = tid
        )
    }

    fn write_fixture(
        dir: &TempDir,
        users: &[&str],
        follows: &[(&str, &str)],
        tweets: &[(&str, &str)],
    ) -> (std::path::PathBuf, std::path::PathBuf, std::path::PathBuf) {
        let users_path = dir.path().join("users.jsonl");
        let follows_path = dir.path().join("follows.jsonl");
        let tweets_path = dir.path().join("tweets.jsonl");
        let users_body: Vec<String> = users.iter().map(|u| user_line(u)).collect();
        fs::write(&users_path, users_body.join("\n")).unwrap();
        let follows_body: Vec<String> = follows
            .iter()
            .map(|(s, d)| format!("{{\"src\":\"{s}\",\"dst\":\"{d}\"}}"))
            .collect();
        fs::write(&follows_path, follows_body.join("\n")).unwrap();
        let tweets_body: Vec<String> = tweets.iter().map(|(u, t)| tweet_line(u, t)).collect();
        fs::write(&tweets_path, tweets_body.join("\n")).unwrap();
        (users_path, follows_path, tweets_path)
    }

    #[test]
    fn loads_small_graph() {
        let dir = TempDir::new().unwrap();
        let (u, f, t) = write_fixture(
            &dir,
            &["a", "b", "c"],
            &[("a", "b"), ("b", "c")],
            &[("a", "t1")],
        );
        let g = HetNet::load(&u, &f, &t).unwrap();
        assert_eq!(g.user_count(), 3);
        assert_eq!(g.tweet_count(), 1);
        assert_eq!(g.topic_count(), 0);
        assert_eq!(g.follow_edge_count(), 2);
    }

    #[test]
    fn dangling_follow_id_is_an_error() {
        let dir = TempDir::new().unwrap();
        let (u, f, t) = write_fixture(&dir, &["a", "b"], &[("a", "zzz")], &[]);
        let err = HetNet::load(&u, &f, &t).unwrap_err();
        assert!(err.to_string().contains("zzz"), "got: {err}");
    }

    #[test]
    fn duplicate_user_id_is_an_error() {
        let dir = TempDir::new().unwrap();
        let (u, f, t) = write_fixture(&dir, &["a", "a"], &[], &[]);
        let err = HetNet::load(&u, &f, &t).unwrap_err();
        assert!(err.to_string().contains("duplicate user id"), "got: {err}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = TempDir::new().unwrap();
        let (u, f, t) = write_fixture(&dir, &["a"], &[], &[]);
        fs::write(&f, "{\"src\":\"a\",\"dst\":\"a\"}\nnot json\n").unwrap();
        let err = HetNet::load(&u, &f, &t).unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 2),
            other => panic!("expected format error, got {other}"),
        }
    }

    #[test]
    fn out_neighbors_sorted_and_empty_cases() {
        let dir = TempDir::new().unwrap();
        let (u, f, t) = write_fixture(
            &dir,
            &["a", "b", "c"],
            &[("a", "c"), ("a", "b")],
            &[("a", "t1")],
        );
        let g = HetNet::load(&u, &f, &t).unwrap();
        let ns = g.out_neighbors(NodeId::user(0), EdgeKind::Follows).unwrap();
        assert_eq!(ns, vec![NodeId::user(1), NodeId::user(2)]);
        // isolated node
        assert!(g
            .out_neighbors(NodeId::user(2), EdgeKind::Follows)
            .unwrap()
            .is_empty());
        // posts edge visible
        let posts = g.out_neighbors(NodeId::user(0), EdgeKind::Posts).unwrap();
        assert_eq!(posts, vec![NodeId::tweet(0)]);
        // unknown node errors
        assert!(g.out_neighbors(NodeId::user(9), EdgeKind::Follows).is_err());
    }

    #[test]
    fn in_neighbors_mirrors_out() {
        let dir = TempDir::new().unwrap();
        let (u, f, t) = write_fixture(&dir, &["a", "b", "c"], &[("a", "b"), ("c", "b")], &[]);
        let g = HetNet::load(&u, &f, &t).unwrap();
        let ns = g.in_neighbors(NodeId::user(1), EdgeKind::Follows).unwrap();
        assert_eq!(ns, vec![NodeId::user(0), NodeId::user(2)]);
        assert!(g
            .in_neighbors(NodeId::user(0), EdgeKind::Follows)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn duplicate_follow_edges_collapse_and_self_follows_drop() {
        let dir = TempDir::new().unwrap();
        let (u, f, t) = write_fixture(
            &dir,
            &["a", "b"],
            &[("a", "b"), ("a", "b"), ("a", "a")],
            &[],
        );
        let g = HetNet::load(&u, &f, &t).unwrap();
        assert_eq!(g.follow_edge_count(), 1);
    }

    #[test]
    fn tweet_posts_in_degree_is_one() {
        let dir = TempDir::new().unwrap();
        let (u, f, t) = write_fixture(&dir, &["a", "b"], &[], &[("a", "t1"), ("b", "t2")]);
        let g = HetNet::load(&u, &f, &t).unwrap();
        for tw in 0..g.tweet_count() as u32 {
            let authors = g.in_neighbors(NodeId::tweet(tw), EdgeKind::Posts).unwrap();
            assert_eq!(authors.len(), 1);
        }
    }

    #[test]
    fn edge_count_sums_match_in_both_directions() {
        let dir = TempDir::new().unwrap();
        let (u, f, t) = write_fixture(
            &dir,
            &["a", "b", "c", "d"],
            &[("a", "b"), ("a", "c"), ("b", "c"), ("d", "a"), ("c", "d")],
            &[],
        );
        let g = HetNet::load(&u, &f, &t).unwrap();
        let total_out: usize = (0..g.user_count() as u32)
            .map(|i| g.out_neighbors(NodeId::user(i), EdgeKind::Follows).unwrap().len())
            .sum();
        let total_in: usize = (0..g.user_count() as u32)
            .map(|i| g.in_neighbors(NodeId::user(i), EdgeKind::Follows).unwrap().len())
            .sum();
        assert_eq!(total_out, g.follow_edge_count());
        assert_eq!(total_in, g.follow_edge_count());
    }

    #[test]
    fn mark_labeled_validates_and_orders() {
        let dir = TempDir::new().unwrap();
        let (u, f, t) = write_fixture(&dir, &["a", "b", "c"], &[], &[]);
        let mut g = HetNet::load(&u, &f, &t).unwrap();
        g.mark_labeled(["c", "a"]).unwrap();
        assert_eq!(g.labeled_users(), &[0, 2]);
        assert_eq!(g.labeled_position(2), Some(1));
        assert_eq!(g.labeled_position(1), None);
        assert!(g.mark_labeled(["nope"]).is_err());
    }

    #[test]
    fn reserialized_graph_is_isomorphic() {
        // Round trip: dump follow edges by user id, reload, compare edge multisets.
        let dir = TempDir::new().unwrap();
        let (u, f, t) = write_fixture(
            &dir,
            &["a", "b", "c"],
            &[("a", "b"), ("b", "c"), ("c", "a")],
            &[("b", "t1")],
        );
        let g = HetNet::load(&u, &f, &t).unwrap();

        let mut edges: Vec<(String, String)> = Vec::new();
        for i in 0..g.user_count() as u32 {
            for n in g.out_neighbors(NodeId::user(i), EdgeKind::Follows).unwrap() {
                edges.push((
                    g.user_record(i).id.clone(),
                    g.user_record(n.index).id.clone(),
                ));
            }
        }
        let follows2 = dir.path().join("follows2.jsonl");
        let body: Vec<String> = edges
            .iter()
            .map(|(s, d)| format!("{{\"src\":\"{s}\",\"dst\":\"{d}\"}}"))
            .collect();
        fs::write(&follows2, body.join("\n")).unwrap();
        let g2 = HetNet::load(&u, &follows2, &t).unwrap();

        let mut edges2: Vec<(String, String)> = Vec::new();
        for i in 0..g2.user_count() as u32 {
            for n in g2.out_neighbors(NodeId::user(i), EdgeKind::Follows).unwrap() {
                edges2.push((
                    g2.user_record(i).id.clone(),
                    g2.user_record(n.index).id.clone(),
                ));
            }
        }
        edges.sort();
        edges2.sort();
        assert_eq!(edges, edges2);
    }
}
