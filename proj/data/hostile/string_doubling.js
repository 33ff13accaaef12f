function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    let s = 'x';
    for (;;) s += s;
}
