//! Closed token vocabularies for the cooking domain.
//!
//! Entity tokens (ingredient and room names) are drawn from the pools
//! below per environment; everything else (relations, statuses, verbs,
//! appliances, containers, special objects) is closed and shared by the
//! whole domain. Renaming-invariant components must only ever mention
//! closed tokens.

pub const RELATIONS: &[&str] = &[
    "at", "east_of", "in", "is", "needs", "north_of", "part_of", "south_of", "west_of",
];

pub const DIRECTIONS: &[&str] = &["east", "north", "south", "west"];

/// Paired arrays: CUT_VERBS[i] produces CUT_FORMS[i].
pub const CUT_VERBS: &[&str] = &["chop", "dice", "slice"];
pub const CUT_FORMS: &[&str] = &["chopped", "diced", "sliced"];

/// Paired arrays: cooking with APPLIANCES[i] produces COOK_FORMS[i].
pub const APPLIANCES: &[&str] = &["bbq", "oven", "stove"];
pub const COOK_FORMS: &[&str] = &["grilled", "roasted", "fried"];

pub const STATUSES: &[&str] = &[
    "uncut", "sliced", "diced", "chopped", "raw", "fried", "roasted", "grilled",
];

pub const PLAYER: &str = "player";
pub const KNIFE: &str = "knife";
pub const COOKBOOK: &str = "cookbook";
pub const MEAL: &str = "meal";

pub const INGREDIENTS: &[&str] = &[
    "apple", "banana", "bean", "broccoli", "cabbage", "carrot", "celery", "cheese", "cilantro",
    "cucumber", "eggplant", "garlic", "leek", "lettuce", "mushroom", "onion", "parsley",
    "pepper", "potato", "pumpkin", "radish", "spinach", "tomato", "zucchini",
];

pub const ROOMS: &[&str] = &[
    "kitchen", "pantry", "backyard", "corridor", "bedroom", "livingroom", "bathroom", "garden",
    "driveway", "shed", "cellar", "attic",
];

pub const CONTAINERS: &[&str] = &[
    "basket", "bin", "box", "chest", "counter", "crate", "cupboard", "fridge", "rack", "shelf",
    "table", "trunk",
];

pub fn cut_form_of(verb: &str) -> Option<&'static str> {
    CUT_VERBS
        .iter()
        .position(|v| *v == verb)
        .map(|i| CUT_FORMS[i])
}

pub fn verb_for_cut_form(form: &str) -> Option<&'static str> {
    CUT_FORMS
        .iter()
        .position(|f| *f == form)
        .map(|i| CUT_VERBS[i])
}

pub fn cook_result_of(appliance: &str) -> Option<&'static str> {
    APPLIANCES
        .iter()
        .position(|a| *a == appliance)
        .map(|i| COOK_FORMS[i])
}

pub fn appliance_for_cook_form(form: &str) -> Option<&'static str> {
    COOK_FORMS
        .iter()
        .position(|f| *f == form)
        .map(|i| APPLIANCES[i])
}

pub fn direction_relation(dir: &str) -> Option<&'static str> {
    match dir {
        "east" => Some("east_of"),
        "west" => Some("west_of"),
        "north" => Some("north_of"),
        "south" => Some("south_of"),
        _ => None,
    }
}

pub fn is_cut_form(tok: &str) -> bool {
    CUT_FORMS.contains(&tok)
}

pub fn is_cook_form(tok: &str) -> bool {
    COOK_FORMS.contains(&tok)
}

pub fn is_ingredient(tok: &str) -> bool {
    INGREDIENTS.contains(&tok)
}

pub fn is_container(tok: &str) -> bool {
    CONTAINERS.contains(&tok)
}

pub fn is_room(tok: &str) -> bool {
    ROOMS.contains(&tok)
}
