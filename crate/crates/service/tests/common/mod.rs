#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use spotit_core::session::Action;
use spotit_core::solver::solve;
use spotit_core::{Card, CardId, Deck, ImageId, Order};

/// In-process client driving the router with `oneshot` requests.
pub struct Client {
    pub app: Router,
}

pub struct Reply {
    pub status: StatusCode,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes).expect("JSON body")
    }
}

impl Client {
    pub fn new(app: Router) -> Self {
        Client { app }
    }

    pub async fn send(&self, method: &str, uri: &str, body: Option<Value>) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        let body = match body {
            Some(v) => {
                req = req.header("content-type", "application/json");
                Body::from(serde_json::to_vec(&v).unwrap())
            }
            None => Body::empty(),
        };
        let resp = self.app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        Reply { status, bytes }
    }

    pub async fn get(&self, uri: &str) -> Reply {
        self.send("GET", uri, None).await
    }

    pub async fn post(&self, uri: &str, body: Value) -> Reply {
        self.send("POST", uri, Some(body)).await
    }

    pub async fn create(&self, order: u32, seed: u64, missing: u8) -> (String, Value) {
        let reply = self.post("/games", json!({"order": order, "seed": seed, "missing": missing})).await;
        assert_eq!(reply.status, StatusCode::OK, "{}", String::from_utf8_lossy(&reply.bytes));
        let v = reply.json();
        (v["game_id"].as_str().unwrap().to_owned(), v["state"].clone())
    }

    pub async fn act(&self, id: &str, action: &Action) -> Reply {
        self.post(&format!("/games/{id}/actions"), json!({ "action": action })).await
    }
}

/// Rebuilds the deck a client sees in a fresh game's state payload.
pub fn deck_from_view(view: &Value) -> Deck {
    let order = Order::new(view["order"].as_u64().unwrap() as u32).unwrap();
    let cards = view["cards"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            let id = CardId(c["id"].as_u64().unwrap() as u32);
            let images = c["images"].as_array().unwrap().iter().map(|i| ImageId(i.as_u64().unwrap() as u32));
            Card::new(id, images).unwrap()
        })
        .collect();
    Deck::new(order, cards)
}

/// The action script a client derives by running the solver on the dealt
/// deck: choose the solver's infinity image and axes, then replay its moves.
pub fn solver_script(view: &Value) -> Vec<Action> {
    let solution = solve(&deck_from_view(view)).expect("dealt deck solves");
    let trace = &solution.trace;
    let mut actions = vec![
        Action::ChooseInfinity { image: trace.infinity },
        Action::ChooseAxes { row_card: trace.row_card, col_card: trace.col_card },
    ];
    actions.extend(solution.log.moves().map(|mv| Action::Move { mv }));
    actions
}
