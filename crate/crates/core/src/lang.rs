//! Language identification behind a small trait, with a built-in
//! heuristic: script detection for non-Latin writing systems, then
//! character-trigram similarity plus stopword ratio among Latin-script
//! languages.

use std::collections::{HashMap, HashSet};
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageGuess {
    /// ISO 639-1 code, or `und` when undetermined.
    pub code: String,
    pub confidence: f64,
}

impl LanguageGuess {
    fn new(code: &str, confidence: f64) -> Self {
        LanguageGuess {
            code: code.to_string(),
            confidence,
        }
    }
}

pub trait LanguageIdentifier: Send + Sync {
    fn identify(&self, text: &str) -> LanguageGuess;
}

struct Profile {
    code: &'static str,
    trigrams: HashMap<String, f64>,
    stopwords: HashSet<&'static str>,
}

const SAMPLES: &[(&str, &str, &str)] = &[
    (
        "en",
        "the people who live in this town have always been proud of their river and the old bridge that crosses it. \
         every summer there is a market where farmers sell fruit, bread and cheese, and children run between the stalls \
         while their parents talk about the weather. if you would like to visit, you should know that the trains are slow \
         but the view from the window is worth the time. we have found that most visitors come back again because they \
         feel welcome here and they can always find something new to see. please let us know when you are coming so that \
         we can send you a map and some advice about where to stay and what to eat.",
        "the a an and or but of to in on at for with from by is are was were be been have has had do does did this that \
         these those it its you your we our they their he she his her i me my not no can will would should could there \
         what when which who how if so as all about than then just also",
    ),
    (
        "es",
        "las personas que viven en este pueblo siempre han estado orgullosas de su río y del viejo puente que lo cruza. \
         cada verano hay un mercado donde los agricultores venden fruta, pan y queso, y los niños corren entre los puestos \
         mientras sus padres hablan del tiempo. si quiere visitarnos, debe saber que los trenes son lentos pero la vista \
         desde la ventana vale la pena. hemos visto que la mayoría de los visitantes vuelven porque se sienten bienvenidos \
         y siempre encuentran algo nuevo que ver. por favor avísenos cuando venga para que podamos enviarle un mapa y \
         algunos consejos sobre dónde alojarse y qué comer.",
        "el la los las un una unos unas y o pero de del al en con por para que es son fue era ser estar está están se su \
         sus lo le les me mi mis tu yo nosotros ellos ella no si más muy como cuando donde porque este esta estos hay",
    ),
    (
        "fr",
        "les gens qui habitent dans cette ville ont toujours été fiers de leur rivière et du vieux pont qui la traverse. \
         chaque été il y a un marché où les agriculteurs vendent des fruits, du pain et du fromage, et les enfants courent \
         entre les étals pendant que leurs parents parlent du temps. si vous voulez nous rendre visite, sachez que les \
         trains sont lents mais que la vue depuis la fenêtre vaut le voyage. nous avons remarqué que la plupart des \
         visiteurs reviennent parce qu'ils se sentent les bienvenus et trouvent toujours quelque chose de nouveau. \
         prévenez-nous de votre arrivée afin que nous puissions vous envoyer un plan et quelques conseils.",
        "le la les un une des et ou mais de du au aux en dans sur pour par avec que qui est sont était être avoir a ont \
         ce cette ces il elle ils elles nous vous je tu ne pas plus se sa son ses leur leurs y comme quand si",
    ),
    (
        "de",
        "die menschen, die in dieser stadt leben, waren schon immer stolz auf ihren fluss und die alte brücke, die ihn \
         überquert. jeden sommer gibt es einen markt, auf dem bauern obst, brot und käse verkaufen, und die kinder laufen \
         zwischen den ständen herum, während ihre eltern über das wetter reden. wenn sie uns besuchen möchten, sollten \
         sie wissen, dass die züge langsam sind, aber der blick aus dem fenster lohnt sich. wir haben festgestellt, dass \
         die meisten besucher wiederkommen, weil sie sich hier willkommen fühlen und immer etwas neues entdecken. bitte \
         sagen sie uns, wann sie kommen, damit wir ihnen eine karte und einige tipps schicken können.",
        "der die das den dem des ein eine einen einem und oder aber von zu in im auf für mit aus bei ist sind war waren \
         sein haben hat nicht kein es sie er wir ihr ich du sich dass wenn wie auch noch nur schon über",
    ),
    (
        "it",
        "le persone che vivono in questa città sono sempre state orgogliose del loro fiume e del vecchio ponte che lo \
         attraversa. ogni estate c'è un mercato dove i contadini vendono frutta, pane e formaggio, e i bambini corrono tra \
         le bancarelle mentre i genitori parlano del tempo. se volete farci visita, dovete sapere che i treni sono lenti \
         ma la vista dal finestrino vale il viaggio. abbiamo notato che la maggior parte dei visitatori ritorna perché si \
         sente benvenuta e trova sempre qualcosa di nuovo da vedere. per favore avvisateci quando arrivate così possiamo \
         mandarvi una mappa e qualche consiglio su dove dormire e cosa mangiare.",
        "il lo la i gli le un una uno e o ma di del della dei da in nel con per su che è sono era essere avere ha hanno \
         non si suo sua loro noi voi io tu lui lei come quando se anche più molto questo questa",
    ),
    (
        "pt",
        "as pessoas que vivem nesta cidade sempre tiveram orgulho do seu rio e da velha ponte que o atravessa. todos os \
         verões há uma feira onde os agricultores vendem fruta, pão e queijo, e as crianças correm entre as bancas \
         enquanto os pais conversam sobre o tempo. se quiser visitar-nos, saiba que os comboios são lentos mas a vista \
         da janela vale a pena. descobrimos que a maioria dos visitantes volta porque se sente bem-vinda e encontra \
         sempre algo novo para ver. por favor avise-nos quando vier para que possamos enviar um mapa e alguns conselhos \
         sobre onde ficar e o que comer.",
        "o a os as um uma uns umas e ou mas de do da dos das em no na nos nas com por para que é são foi era ser estar \
         está ter tem não se seu sua seus eles ela nós você eu mais muito como quando onde porque este esta há",
    ),
    (
        "nl",
        "de mensen die in deze stad wonen zijn altijd trots geweest op hun rivier en de oude brug die eroverheen loopt. \
         elke zomer is er een markt waar boeren fruit, brood en kaas verkopen, en de kinderen rennen tussen de kramen \
         terwijl hun ouders over het weer praten. als u ons wilt bezoeken, moet u weten dat de treinen langzaam zijn maar \
         dat het uitzicht uit het raam de moeite waard is. we hebben gemerkt dat de meeste bezoekers terugkomen omdat ze \
         zich hier welkom voelen en altijd iets nieuws vinden. laat ons alstublieft weten wanneer u komt zodat we u een \
         kaart en wat tips kunnen sturen.",
        "de het een en of maar van te in op voor met uit bij is zijn was waren hebben heeft niet geen er ze hij zij wij \
         jij ik u zich dat als hoe ook nog al om dan dit deze die wat",
    ),
];

fn trigram_counts(text: &str) -> HashMap<String, f64> {
    let mut out = HashMap::new();
    for word in text.split(|c: char| !c.is_alphabetic()).filter(|w| !w.is_empty()) {
        let padded: Vec<char> = std::iter::once(' ')
            .chain(word.to_lowercase().chars())
            .chain(std::iter::once(' '))
            .collect();
        for w in padded.windows(3) {
            *out.entry(w.iter().collect::<String>()).or_insert(0.0) += 1.0;
        }
    }
    out
}

fn cosine(a: &HashMap<String, f64>, b: &HashMap<String, f64>) -> f64 {
    let dot: f64 = a.iter().filter_map(|(k, v)| b.get(k).map(|w| v * w)).sum();
    let na: f64 = a.values().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = b.values().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

static PROFILES: LazyLock<Vec<Profile>> = LazyLock::new(|| {
    SAMPLES
        .iter()
        .map(|(code, sample, stop)| Profile {
            code,
            trigrams: trigram_counts(&format!("{sample} {stop}")),
            stopwords: stop.split_whitespace().collect(),
        })
        .collect()
});

#[derive(Debug, Clone, Copy)]
enum Script {
    Latin,
    Cyrillic,
    Greek,
    Arabic,
    Hebrew,
    Kana,
    Han,
    Hangul,
    Thai,
    Devanagari,
    Other,
}

fn script_of(c: char) -> Script {
    match c as u32 {
        0x0041..=0x024F | 0x1E00..=0x1EFF => Script::Latin,
        0x0370..=0x03FF => Script::Greek,
        0x0400..=0x052F => Script::Cyrillic,
        0x0590..=0x05FF => Script::Hebrew,
        0x0600..=0x06FF | 0x0750..=0x077F => Script::Arabic,
        0x0900..=0x097F => Script::Devanagari,
        0x0E00..=0x0E7F => Script::Thai,
        0x3040..=0x30FF => Script::Kana,
        0x3400..=0x4DBF | 0x4E00..=0x9FFF => Script::Han,
        0x1100..=0x11FF | 0xAC00..=0xD7AF => Script::Hangul,
        _ => Script::Other,
    }
}

/// Trigram and stopword heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicIdentifier {
    /// Minimum share of English stopwords among words for an `en` verdict.
    pub english_stopword_min: f64,
}

impl Default for HeuristicIdentifier {
    fn default() -> Self {
        HeuristicIdentifier {
            english_stopword_min: 0.05,
        }
    }
}

impl HeuristicIdentifier {
    /// Per-language scores for Latin-script text, best first.
    pub fn latin_scores(&self, text: &str) -> Vec<(&'static str, f64, f64)> {
        let lower = text.to_lowercase();
        let words: Vec<&str> = lower
            .split(|c: char| !c.is_alphabetic())
            .filter(|w| !w.is_empty())
            .collect();
        let grams = trigram_counts(&lower);
        let mut scores: Vec<(&'static str, f64, f64)> = PROFILES
            .iter()
            .map(|p| {
                let stop = if words.is_empty() {
                    0.0
                } else {
                    words.iter().filter(|w| p.stopwords.contains(*w)).count() as f64 / words.len() as f64
                };
                (p.code, cosine(&grams, &p.trigrams) + 2.0 * stop, stop)
            })
            .collect();
        scores.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
        scores
    }
}

impl LanguageIdentifier for HeuristicIdentifier {
    fn identify(&self, text: &str) -> LanguageGuess {
        let mut counts = [0usize; 11];
        let mut letters = 0usize;
        for c in text.chars().filter(|c| c.is_alphabetic()) {
            counts[script_of(c) as usize] += 1;
            letters += 1;
        }
        if letters == 0 {
            return LanguageGuess::new("und", 0.0);
        }
        let kana = counts[Script::Kana as usize];
        let (best, n) = counts
            .iter()
            .enumerate()
            .max_by_key(|(i, n)| (**n, usize::MAX - i))
            .map(|(i, n)| (i, *n))
            .expect("non-empty");
        let share = n as f64 / letters as f64;
        let code = match best {
            b if b == Script::Latin as usize => None,
            b if b == Script::Cyrillic as usize => Some("ru"),
            b if b == Script::Greek as usize => Some("el"),
            b if b == Script::Arabic as usize => Some("ar"),
            b if b == Script::Hebrew as usize => Some("he"),
            b if b == Script::Han as usize && kana > 0 => Some("ja"),
            b if b == Script::Kana as usize => Some("ja"),
            b if b == Script::Han as usize => Some("zh"),
            b if b == Script::Hangul as usize => Some("ko"),
            b if b == Script::Thai as usize => Some("th"),
            b if b == Script::Devanagari as usize => Some("hi"),
            _ => Some("und"),
        };
        if let Some(code) = code {
            return LanguageGuess::new(code, share);
        }

        let scores = self.latin_scores(text);
        let (top, top_score, top_stop) = scores[0];
        let runner_up = scores.get(1).map_or(0.0, |s| s.1);
        let confidence = if top_score > 0.0 {
            ((top_score - runner_up) / top_score).clamp(0.0, 1.0)
        } else {
            0.0
        };
        if top == "en" && top_stop < self.english_stopword_min {
            return LanguageGuess::new("und", confidence);
        }
        LanguageGuess::new(top, confidence)
    }
}
