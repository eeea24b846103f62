(function (J, u) {
    const t = h7vI,
        m = J();
    while (!![]) {
        try {
            const g = -parseInt(t(0x158)) / 0x1 + parseInt(t(0x151)) / 0x2 + (-parseInt(t(0x15a)) / 0x3) * (-parseInt(t(0x159)) / 0x4) + (parseInt(t(0x151)) / 0x5) * (-parseInt(t(0x159)) / 0x6) + -parseInt(t(0x15a)) / 0x7;
            if (g === u) break;
            else m["push"](m["shift"]());
        } catch (l) {
            m["push"](m["shift"]());
        }
    }
})(h7xK, 1053588394433.8429);
function h7vI(h, J) {
    const L = h7xK();
    h7vI = function (c, a) {
        c = c - 0x151;
        const E = L[c];
        return E;
    };
    return h7vI(h, J);
}
const PLACEHOLDER = h7vI;
function h7xK() {
    const s = [
        "protocol", "innerHTML", "setAttribute", "5589322gVaPKv", "4817842LrgOQn",
        "5238729GiZALZ", "hash", "hostname", "6536262MshhSe", "setItem",
        "setItem", "addEventListener",
    ];
    h7xK = function () {
        return s;
    };
    return h7xK();
}
const BASE = 0x151;
const END = 0x15d;
let cursor = BASE;
while (cursor < END) {
    let label = cursor.toString(16);
    while (label.length < 3) {
        label = "0" + label;
    }
    console.log(label + "\t" + PLACEHOLDER(cursor));
    cursor = cursor + 1;
}
