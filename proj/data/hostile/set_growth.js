function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    const s = new Set();
    for (let i = 0; ; i++) s.add('v' + i);
}
