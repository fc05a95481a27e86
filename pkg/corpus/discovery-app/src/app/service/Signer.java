package app.service;

import app.crypto.CryptoConfig;
import java.security.PrivateKey;
import java.security.PublicKey;
import java.security.Signature;

public class Signer {
    public byte[] sign(PrivateKey key, byte[] document) throws Exception {
        Signature signature = Signature.getInstance(CryptoConfig.SIGNATURE_ALG);
        signature.initSign(key);
        signature.update(document);
        return signature.sign();
    }

    public boolean verify(PublicKey key, byte[] document, byte[] sig) throws Exception {
        Signature signature = Signature.getInstance(CryptoConfig.SIGNATURE_ALG);
        signature.initVerify(key);
        signature.update(document);
        return signature.verify(sig);
    }
}
